#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqens/digest.hpp"
#include "seqens/nets.hpp"
#include "seqens/rng.hpp"

namespace seqens {

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

struct Dataset {
    enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

    std::size_t dim = 0;
    std::size_t num_classes = 0;
    std::vector<double> features;  // N x dim row-major
    std::vector<int> labels;
    std::vector<Split> split;
    std::vector<int> tier;  // generator diagnostics; empty for loaded data
    std::string provenance;

    std::size_t size() const { return labels.size(); }

    const double* row(std::size_t i) const { return &features[i * dim]; }

    std::vector<std::size_t> indices_of(Split s) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < split.size(); ++i)
            if (split[i] == s) out.push_back(i);
        return out;
    }

    void append(const Dataset& other, Split tag) {
        if (dim == 0) {
            dim = other.dim;
            num_classes = other.num_classes;
        }
        if (other.dim != dim || other.num_classes != num_classes) {
            throw std::invalid_argument("dataset append: incompatible dimensions");
        }
        features.insert(features.end(), other.features.begin(), other.features.end());
        labels.insert(labels.end(), other.labels.begin(), other.labels.end());
        tier.insert(tier.end(), other.tier.begin(), other.tier.end());
        split.insert(split.end(), other.size(), tag);
    }

    void validate() const {
        if (features.size() != size() * dim) {
            throw std::invalid_argument("dataset: feature matrix size mismatch");
        }
        for (int y : labels) {
            if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
                throw std::invalid_argument("dataset: label " + std::to_string(y) +
                                            " out of range [0, " + std::to_string(num_classes) +
                                            ")");
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Tiered Gaussian-mixture generator
// ---------------------------------------------------------------------------

// Synthetic benchmark with strata of increasing class overlap: class means
// are fixed across tiers, per-tier noise grows geometrically, so tier-1
// samples are solvable by a single small classifier while tier-3 samples sit
// deep in the overlap region. Tier membership is recorded per sample.
struct TieredConfig {
    std::size_t n_per_tier = 1000;
    std::size_t tiers = 3;
    std::size_t classes = 3;
    std::size_t dim = 8;
    double mean_scale = 2.0;
    double sigma_easy = 0.45;
    double sigma_hard = 2.4;
};

namespace detail {

inline std::vector<double> class_means(std::size_t classes, std::size_t dim, double scale,
                                       Rng& rng) {
    std::vector<double> means(classes * dim, 0.0);
    if (classes <= dim) {
        for (std::size_t k = 0; k < classes; ++k) means[k * dim + k] = scale;
    } else {
        // More classes than axes: random directions, normalized to the scale.
        for (std::size_t k = 0; k < classes; ++k) {
            double norm2 = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                double v = rng.normal();
                means[k * dim + j] = v;
                norm2 += v * v;
            }
            double inv = scale / std::sqrt(norm2);
            for (std::size_t j = 0; j < dim; ++j) means[k * dim + j] *= inv;
        }
    }
    return means;
}

}  // namespace detail

inline Dataset gen_tiered(const TieredConfig& cfg, std::uint64_t seed) {
    if (cfg.n_per_tier == 0 || cfg.tiers == 0 || cfg.classes < 2) {
        throw std::invalid_argument("gen_tiered: sizes must be positive and classes >= 2");
    }
    if (cfg.dim < 2 || cfg.dim > 16) {
        throw std::invalid_argument("gen_tiered: dim must be in [2, 16], got " +
                                    std::to_string(cfg.dim));
    }
    Rng rng = Rng::derive(seed, "data");
    Dataset ds;
    ds.dim = cfg.dim;
    ds.num_classes = cfg.classes;
    auto means = detail::class_means(cfg.classes, cfg.dim, cfg.mean_scale, rng);

    std::vector<double> sigma(cfg.tiers);
    for (std::size_t t = 0; t < cfg.tiers; ++t) {
        double frac = cfg.tiers == 1 ? 0.0
                                     : static_cast<double>(t) / static_cast<double>(cfg.tiers - 1);
        sigma[t] = cfg.sigma_easy * std::pow(cfg.sigma_hard / cfg.sigma_easy, frac);
    }

    const std::size_t n = cfg.n_per_tier * cfg.tiers;
    ds.features.reserve(n * cfg.dim);
    ds.labels.reserve(n);
    ds.tier.reserve(n);
    for (std::size_t t = 0; t < cfg.tiers; ++t) {
        for (std::size_t j = 0; j < cfg.n_per_tier; ++j) {
            int label = static_cast<int>(j % cfg.classes);
            const double* mu = &means[static_cast<std::size_t>(label) * cfg.dim];
            for (std::size_t d = 0; d < cfg.dim; ++d)
                ds.features.push_back(mu[d] + sigma[t] * rng.normal());
            ds.labels.push_back(label);
            ds.tier.push_back(static_cast<int>(t) + 1);
        }
    }
    ds.split.assign(n, Dataset::Split::train);
    std::ostringstream prov;
    prov << "tiered(n_per_tier=" << cfg.n_per_tier << ",tiers=" << cfg.tiers
         << ",classes=" << cfg.classes << ",dim=" << cfg.dim << ",seed=" << seed << ")";
    ds.provenance = prov.str();
    return ds;
}

inline Dataset gen_tiered(std::size_t n_per_tier, std::size_t tiers, std::size_t classes,
                          std::size_t dim, std::uint64_t seed) {
    TieredConfig cfg;
    cfg.n_per_tier = n_per_tier;
    cfg.tiers = tiers;
    cfg.classes = classes;
    cfg.dim = dim;
    return gen_tiered(cfg, seed);
}

// Generates exactly n_total samples, distributing the remainder over the
// leading tiers when n_total is not a tier multiple.
inline Dataset gen_tiered_total(std::size_t n_total, TieredConfig cfg, std::uint64_t seed) {
    if (n_total == 0) throw std::invalid_argument("gen_tiered_total: empty request");
    std::size_t base = n_total / cfg.tiers;
    std::size_t rem = n_total % cfg.tiers;
    Dataset out;
    for (std::size_t t = 0; t < cfg.tiers; ++t) {
        std::size_t want = base + (t < rem ? 1 : 0);
        if (want == 0) continue;
        TieredConfig one = cfg;
        one.n_per_tier = want;
        one.tiers = 1;
        one.sigma_easy = cfg.sigma_easy *
                         std::pow(cfg.sigma_hard / cfg.sigma_easy,
                                  cfg.tiers == 1 ? 0.0
                                                 : static_cast<double>(t) /
                                                       static_cast<double>(cfg.tiers - 1));
        one.sigma_hard = one.sigma_easy;
        Dataset block = gen_tiered(one, mix64(seed) + t);
        for (auto& tr : block.tier) tr = static_cast<int>(t) + 1;
        out.append(block, Dataset::Split::train);
    }
    std::ostringstream prov;
    prov << "tiered_total(n=" << n_total << ",tiers=" << cfg.tiers << ",classes=" << cfg.classes
         << ",dim=" << cfg.dim << ",seed=" << seed << ")";
    out.provenance = prov.str();
    return out;
}

// Train/val/test blocks drawn from independent substreams of one seed.
inline Dataset gen_tiered_splits(std::size_t train_n, std::size_t val_n, std::size_t test_n,
                                 TieredConfig cfg, std::uint64_t seed) {
    Dataset out;
    struct Block {
        std::size_t n;
        Dataset::Split tag;
        const char* stream;
    };
    for (const auto& blk : {Block{train_n, Dataset::Split::train, "train"},
                            Block{val_n, Dataset::Split::val, "val"},
                            Block{test_n, Dataset::Split::test, "test"}}) {
        if (blk.n == 0) continue;
        Dataset part = gen_tiered_total(blk.n, cfg, mix64(seed ^ fnv1a64(blk.stream)));
        out.append(part, blk.tag);
    }
    std::ostringstream prov;
    prov << "tiered_splits(train=" << train_n << ",val=" << val_n << ",test=" << test_n
         << ",tiers=" << cfg.tiers << ",classes=" << cfg.classes << ",dim=" << cfg.dim
         << ",seed=" << seed << ")";
    out.provenance = prov.str();
    out.validate();
    return out;
}

// ---------------------------------------------------------------------------
// IDX loader (big-endian magic + dims)
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint32_t read_be32(std::istream& in, const std::string& path, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw std::runtime_error(path + ": truncated while reading " + what);
    }
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

struct IdxArray {
    std::vector<std::size_t> dims;
    std::vector<unsigned char> bytes;
};

inline IdxArray read_idx_u8(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::uint32_t magic = read_be32(in, path, "magic");
    if ((magic & 0xFFFF0000u) != 0 || ((magic >> 8) & 0xFF) != 0x08) {
        throw std::runtime_error(path + ": bad IDX magic (expected unsigned-byte data type)");
    }
    std::size_t ndims = magic & 0xFF;
    if (ndims == 0 || ndims > 3) {
        throw std::runtime_error(path + ": unsupported IDX rank " + std::to_string(ndims));
    }
    IdxArray arr;
    std::size_t total = 1;
    for (std::size_t i = 0; i < ndims; ++i) {
        std::size_t d = read_be32(in, path, "dimension");
        arr.dims.push_back(d);
        total *= d;
    }
    arr.bytes.resize(total);
    if (!in.read(reinterpret_cast<char*>(arr.bytes.data()), static_cast<std::streamsize>(total))) {
        throw std::runtime_error(path + ": truncated payload, expected " + std::to_string(total) +
                                 " bytes");
    }
    return arr;
}

}  // namespace detail

// Loads an IDX image/label file pair; features are flattened to N x (R*C)
// and scaled to [0,1] by 1/255.
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    auto images = detail::read_idx_u8(images_path);
    auto labels = detail::read_idx_u8(labels_path);
    if (labels.dims.size() != 1) {
        throw std::runtime_error(labels_path + ": label file must be rank 1");
    }
    if (images.dims.empty() || images.dims[0] != labels.dims[0]) {
        throw std::runtime_error(images_path + ": sample count mismatch with " + labels_path);
    }
    Dataset ds;
    const std::size_t n = images.dims[0];
    std::size_t row = 1;
    for (std::size_t i = 1; i < images.dims.size(); ++i) row *= images.dims[i];
    if (row == 0 || n == 0) throw std::runtime_error(images_path + ": empty dataset");
    ds.dim = row;
    ds.features.resize(n * row);
    for (std::size_t i = 0; i < n * row; ++i)
        ds.features[i] = static_cast<double>(images.bytes[i]) / 255.0;
    ds.labels.resize(n);
    int max_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ds.labels[i] = static_cast<int>(labels.bytes[i]);
        max_label = std::max(max_label, ds.labels[i]);
    }
    ds.num_classes = static_cast<std::size_t>(max_label) + 1;
    ds.split.assign(n, Dataset::Split::train);
    ds.provenance = "idx(" + images_path + "," + labels_path + ")";
    ds.validate();
    return ds;
}

// ---------------------------------------------------------------------------
// CSV loader/writer
// ---------------------------------------------------------------------------

// Numeric columns with a trailing integer label. Features are min-max scaled
// to [0,1] per column (idempotent: a second pass over already-scaled data is
// the identity up to float formatting); constant columns map to 0.
inline Dataset load_csv(const std::string& path, bool has_header = false) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;
    std::size_t cols = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && has_header) continue;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                double v = std::stod(cell, &used);
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
                    ++used;
                if (used != cell.size()) throw std::invalid_argument("trailing characters");
                row.push_back(v);
            } catch (const std::exception&) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": non-numeric cell '" + cell + "'");
            }
        }
        if (row.size() < 2) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": need at least one feature and a label");
        }
        if (cols == 0) {
            cols = row.size();
        } else if (row.size() != cols) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(cols) + " columns, got " +
                                     std::to_string(row.size()));
        }
        double label = row.back();
        if (label != std::floor(label) || label < 0) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": label must be a non-negative integer");
        }
        ds.labels.push_back(static_cast<int>(label));
        ds.features.insert(ds.features.end(), row.begin(), row.end() - 1);
    }
    if (ds.labels.empty()) throw std::runtime_error(path + ": no data rows");
    ds.dim = cols - 1;
    int max_label = 0;
    for (int y : ds.labels) max_label = std::max(max_label, y);
    ds.num_classes = static_cast<std::size_t>(max_label) + 1;

    for (std::size_t j = 0; j < ds.dim; ++j) {
        double lo = ds.features[j], hi = ds.features[j];
        for (std::size_t i = 1; i < ds.labels.size(); ++i) {
            lo = std::min(lo, ds.features[i * ds.dim + j]);
            hi = std::max(hi, ds.features[i * ds.dim + j]);
        }
        double range = hi - lo;
        for (std::size_t i = 0; i < ds.labels.size(); ++i) {
            double& v = ds.features[i * ds.dim + j];
            v = range > 0 ? (v - lo) / range : 0.0;
        }
    }
    ds.split.assign(ds.labels.size(), Dataset::Split::train);
    ds.provenance = "csv(" + path + ")";
    ds.validate();
    return ds;
}

inline void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out.precision(17);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < ds.dim; ++j) out << ds.features[i * ds.dim + j] << ",";
        out << ds.labels[i] << "\n";
    }
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------
//
// Two files per checkpoint: <prefix>.manifest (plain text) and
// <prefix>.payload (little-endian float32 arrays, concatenated row-major).
// Training computes in float64; parameters round-trip through float32, which
// the manifest records as the storage precision.

struct CheckpointMeta {
    std::vector<std::pair<std::string, std::string>> entries;

    void set(const std::string& k, const std::string& v) { entries.emplace_back(k, v); }

    const std::string* find(const std::string& k) const {
        for (const auto& [key, val] : entries)
            if (key == k) return &val;
        return nullptr;
    }
};

namespace detail {

struct NamedArray {
    std::string name;
    TensorPtr tensor;
};

inline std::vector<NamedArray> checkpoint_arrays(const std::vector<BaseModel>& models,
                                                 const Selector& selector) {
    static const char* kSelectorNames[] = {"wr", "ur", "br", "wz",  "uz",     "bz",
                                           "wn", "bn", "un", "bhn", "halt.w", "halt.b"};
    std::vector<NamedArray> arrays;
    for (std::size_t t = 0; t < models.size(); ++t) {
        auto params = models[t].params();
        const auto& cfg = models[t].config();
        std::size_t idx = 0;
        for (std::size_t l = 0; l < cfg.hidden.size(); ++l) {
            arrays.push_back({"model" + std::to_string(t + 1) + ".trunk" + std::to_string(l) + ".w",
                              params[idx++]});
            arrays.push_back({"model" + std::to_string(t + 1) + ".trunk" + std::to_string(l) + ".b",
                              params[idx++]});
        }
        arrays.push_back({"model" + std::to_string(t + 1) + ".main.w", params[idx++]});
        arrays.push_back({"model" + std::to_string(t + 1) + ".main.b", params[idx++]});
        arrays.push_back({"model" + std::to_string(t + 1) + ".aux.w", params[idx++]});
        arrays.push_back({"model" + std::to_string(t + 1) + ".aux.b", params[idx++]});
    }
    auto sel_params = selector.params();
    for (std::size_t i = 0; i < sel_params.size(); ++i) {
        arrays.push_back({std::string("selector.") + kSelectorNames[i], sel_params[i]});
    }
    return arrays;
}

inline void write_le_f32(std::string& out, double v) {
    float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    out.push_back(static_cast<char>(bits & 0xFF));
    out.push_back(static_cast<char>((bits >> 8) & 0xFF));
    out.push_back(static_cast<char>((bits >> 16) & 0xFF));
    out.push_back(static_cast<char>((bits >> 24) & 0xFF));
}

inline double read_le_f32(const std::string& payload, std::size_t off) {
    std::uint32_t bits = (std::uint32_t(static_cast<unsigned char>(payload[off]))) |
                         (std::uint32_t(static_cast<unsigned char>(payload[off + 1])) << 8) |
                         (std::uint32_t(static_cast<unsigned char>(payload[off + 2])) << 16) |
                         (std::uint32_t(static_cast<unsigned char>(payload[off + 3])) << 24);
    float f;
    std::memcpy(&f, &bits, 4);
    return static_cast<double>(f);
}

inline std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace detail

constexpr int kCheckpointVersion = 1;

inline void save_checkpoint(const std::vector<BaseModel>& models, const Selector& selector,
                            const CheckpointMeta& meta, const std::string& prefix) {
    if (models.empty()) throw std::invalid_argument("save_checkpoint: no models");
    auto arrays = detail::checkpoint_arrays(models, selector);

    std::string payload;
    std::ostringstream man;
    man << "format seqens-checkpoint\n";
    man << "version " << kCheckpointVersion << "\n";
    man << "precision float32-le\n";
    man << "cell " << Selector::kCellVariant << "\n";
    man << "stages " << models.size() << "\n";
    man << "input_dim " << models[0].config().input_dim << "\n";
    man << "num_classes " << models[0].config().num_classes << "\n";
    man << "trunk " << detail::join_sizes(models[0].config().hidden) << "\n";
    man << "sel_hidden " << selector.config().hidden << "\n";
    for (const auto& [k, v] : meta.entries) man << "meta." << k << " " << v << "\n";
    for (const auto& arr : arrays) {
        std::size_t off = payload.size();
        for (double v : arr.tensor->data) detail::write_le_f32(payload, v);
        man << "array " << arr.name << " " << detail::join_sizes(arr.tensor->shape) << " " << off
            << " " << payload.size() - off << "\n";
    }
    man << "payload_bytes " << payload.size() << "\n";
    man << "payload_sha1 " << sha1_hex(payload) << "\n";

    std::ofstream mf(prefix + ".manifest");
    if (!mf) throw std::runtime_error(prefix + ".manifest: cannot open for writing");
    mf << man.str();
    std::ofstream pf(prefix + ".payload", std::ios::binary);
    if (!pf) throw std::runtime_error(prefix + ".payload: cannot open for writing");
    pf.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

struct Checkpoint {
    std::vector<BaseModel> models;
    Selector selector;
    CheckpointMeta meta;
};

inline Checkpoint load_checkpoint(const std::string& prefix) {
    std::ifstream mf(prefix + ".manifest");
    if (!mf) throw std::runtime_error(prefix + ".manifest: cannot open");
    std::map<std::string, std::string> keys;
    struct ArrayEntry {
        std::string name;
        std::vector<std::size_t> shape;
        std::size_t offset, bytes;
    };
    std::vector<ArrayEntry> arrays;
    CheckpointMeta meta;
    std::string line;
    while (std::getline(mf, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "array") {
            ArrayEntry e;
            std::string shape_s;
            ss >> e.name >> shape_s >> e.offset >> e.bytes;
            if (ss.fail()) throw std::runtime_error(prefix + ": malformed array line: " + line);
            std::stringstream sh(shape_s);
            std::string d;
            while (std::getline(sh, d, 'x')) e.shape.push_back(std::stoul(d));
            arrays.push_back(std::move(e));
        } else if (key.rfind("meta.", 0) == 0) {
            std::string value;
            std::getline(ss, value);
            if (!value.empty() && value[0] == ' ') value.erase(0, 1);
            meta.set(key.substr(5), value);
        } else {
            std::string value;
            std::getline(ss, value);
            if (!value.empty() && value[0] == ' ') value.erase(0, 1);
            keys[key] = value;
        }
    }
    auto need = [&](const std::string& k) -> const std::string& {
        auto it = keys.find(k);
        if (it == keys.end()) throw std::runtime_error(prefix + ": manifest missing key " + k);
        return it->second;
    };
    if (need("format") != "seqens-checkpoint") {
        throw std::runtime_error(prefix + ": not a checkpoint manifest");
    }
    if (std::stoi(need("version")) != kCheckpointVersion) {
        throw std::runtime_error(prefix + ": unsupported checkpoint version " + need("version"));
    }

    std::ifstream pf(prefix + ".payload", std::ios::binary);
    if (!pf) throw std::runtime_error(prefix + ".payload: cannot open");
    std::string payload((std::istreambuf_iterator<char>(pf)), std::istreambuf_iterator<char>());
    if (payload.size() != std::stoul(need("payload_bytes"))) {
        throw std::runtime_error(prefix + ": payload is " + std::to_string(payload.size()) +
                                 " bytes, manifest says " + need("payload_bytes"));
    }
    if (sha1_hex(payload) != need("payload_sha1")) {
        throw std::runtime_error(prefix + ": payload digest mismatch");
    }

    Checkpoint ck;
    ck.meta = meta;
    BaseModelConfig mcfg;
    mcfg.input_dim = std::stoul(need("input_dim"));
    mcfg.num_classes = std::stoul(need("num_classes"));
    mcfg.hidden.clear();
    {
        std::stringstream sh(need("trunk"));
        std::string d;
        while (std::getline(sh, d, 'x')) mcfg.hidden.push_back(std::stoul(d));
    }
    SelectorConfig scfg;
    scfg.input_dim = selector_input_dim(mcfg.num_classes);
    scfg.hidden = std::stoul(need("sel_hidden"));
    std::size_t stages = std::stoul(need("stages"));

    Rng init_rng(0);  // values are overwritten below
    for (std::size_t t = 0; t < stages; ++t) ck.models.emplace_back(mcfg, init_rng);
    ck.selector = Selector(scfg, init_rng);

    auto named = detail::checkpoint_arrays(ck.models, ck.selector);
    if (named.size() != arrays.size()) {
        throw std::runtime_error(prefix + ": manifest lists " + std::to_string(arrays.size()) +
                                 " arrays, architecture has " + std::to_string(named.size()));
    }
    for (std::size_t i = 0; i < named.size(); ++i) {
        const auto& e = arrays[i];
        if (e.name != named[i].name) {
            throw std::runtime_error(prefix + ": unexpected array " + e.name + ", wanted " +
                                     named[i].name);
        }
        TensorPtr t = named[i].tensor;
        if (e.shape != t->shape) {
            throw std::runtime_error(prefix + ": array " + e.name + " has shape " +
                                     detail::join_sizes(e.shape) + ", architecture wants " +
                                     detail::join_sizes(t->shape));
        }
        if (e.bytes != t->size() * 4 || e.offset + e.bytes > payload.size()) {
            throw std::runtime_error(prefix + ": array " + e.name + " outside payload bounds");
        }
        for (std::size_t j = 0; j < t->size(); ++j)
            t->data[j] = detail::read_le_f32(payload, e.offset + 4 * j);
    }
    return ck;
}

}  // namespace seqens
