// Command-line driver: train the halting cascade, evaluate methods against
// the baselines, sweep trade-off grids, and render report plots.
//
// Subcommands: train, eval, baseline, sweep, report. Every flag can also be
// set through an environment variable with the SEQENS_ prefix (SEQENS_SEED,
// SEQENS_OUT, ...). All outputs are deterministic under a fixed seed.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqens/seqens.hpp"

namespace fs = std::filesystem;
using namespace seqens;

namespace {

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Configuration schema
// ---------------------------------------------------------------------------

const std::vector<std::string> kAllowedKeys = {
    "seed",
    "data.kind",
    "data.dim",
    "data.classes",
    "data.tiers",
    "data.train_n",
    "data.val_n",
    "data.test_n",
    "data.mean_scale",
    "data.sigma_easy",
    "data.sigma_hard",
    "data.train_images",
    "data.train_labels",
    "data.test_images",
    "data.test_labels",
    "data.csv",
    "data.csv_header",
    "data.val_frac",
    "data.test_frac",
    "model.hidden",
    "model.sel_hidden",
    "train.stages",
    "train.epochs",
    "train.batch",
    "train.base_lr",
    "train.base_momentum",
    "train.base_weight_decay",
    "train.base_milestones",
    "train.base_lr_factor",
    "train.sel_lr",
    "train.sel_halt_bias",
    "train.sel_weight_decay",
    "train.sel_stage_decay",
    "train.w1",
    "train.w2",
    "train.w3",
    "train.lambda_dis",
    "train.gumbel_tau_start",
    "train.gumbel_tau_end",
    "utility.tau_c",
};

void validate_config_keys(const KvConfig& cfg) {
    auto unknown = cfg.unknown_keys(kAllowedKeys);
    if (!unknown.empty()) {
        std::string msg = cfg.origin() + ": unknown config keys:";
        for (const auto& k : unknown) msg += "\n  " + k;
        throw std::runtime_error(msg);
    }
}

TrainConfig load_train_config(const KvConfig& cfg) {
    TrainConfig tc;
    tc.seed = cfg.get_u64("seed", 0);
    tc.stages = cfg.get_size("train.stages", 3);
    tc.epochs = cfg.get_size("train.epochs", 30);
    tc.batch_size = cfg.get_size("train.batch", 128);
    tc.hidden = cfg.get_sizes("model.hidden", {64, 64});
    tc.sel_hidden = cfg.get_size("model.sel_hidden", 32);
    tc.base_lr = cfg.get_double("train.base_lr", 0.1);
    tc.base_momentum = cfg.get_double("train.base_momentum", 0.9);
    tc.base_weight_decay = cfg.get_double("train.base_weight_decay", 5e-4);
    tc.milestone_fracs = cfg.get_doubles("train.base_milestones", {0.3, 0.6, 0.8});
    tc.milestone_factor = cfg.get_double("train.base_lr_factor", 0.2);
    tc.sel_lr = cfg.get_double("train.sel_lr", 2e-3);
    tc.sel_halt_bias_init = cfg.get_double("train.sel_halt_bias", -2.0);
    tc.sel_weight_decay = cfg.get_double("train.sel_weight_decay", 1e-5);
    tc.sel_stage_decay = cfg.get_double("train.sel_stage_decay", 0.5);
    tc.weights.w1 = cfg.get_double("train.w1", 0.05);
    tc.weights.w2 = cfg.get_double("train.w2", 0.01);
    tc.weights.w3 = cfg.get_double("train.w3", 0.05);
    tc.lambda_dis = cfg.get_double("train.lambda_dis", 0.01);
    tc.gumbel_tau_start = cfg.get_double("train.gumbel_tau_start", 1.0);
    tc.gumbel_tau_end = cfg.get_double("train.gumbel_tau_end", 1.0);
    tc.validate();
    return tc;
}

void split_by_fraction(Dataset& ds, double val_frac, double test_frac, std::uint64_t seed) {
    std::vector<std::size_t> idx(ds.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng = Rng::derive(seed, "split");
    rng.shuffle(idx);
    auto n_test = static_cast<std::size_t>(test_frac * static_cast<double>(ds.size()));
    auto n_val = static_cast<std::size_t>(val_frac * static_cast<double>(ds.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i < n_test) {
            ds.split[idx[i]] = Dataset::Split::test;
        } else if (i < n_test + n_val) {
            ds.split[idx[i]] = Dataset::Split::val;
        } else {
            ds.split[idx[i]] = Dataset::Split::train;
        }
    }
}

Dataset load_dataset(const KvConfig& cfg, std::uint64_t seed) {
    std::string kind = cfg.get_str("data.kind", "tiered");
    if (kind == "tiered") {
        TieredConfig tcfg;
        tcfg.dim = cfg.get_size("data.dim", 8);
        tcfg.classes = cfg.get_size("data.classes", 3);
        tcfg.tiers = cfg.get_size("data.tiers", 3);
        tcfg.mean_scale = cfg.get_double("data.mean_scale", 2.0);
        tcfg.sigma_easy = cfg.get_double("data.sigma_easy", 0.45);
        tcfg.sigma_hard = cfg.get_double("data.sigma_hard", 2.4);
        return gen_tiered_splits(cfg.get_size("data.train_n", 3000),
                                 cfg.get_size("data.val_n", 0),
                                 cfg.get_size("data.test_n", 1000), tcfg, seed);
    }
    if (kind == "idx") {
        Dataset ds = load_idx(cfg.require_str("data.train_images"),
                              cfg.require_str("data.train_labels"));
        if (cfg.has("data.test_images")) {
            Dataset test = load_idx(cfg.require_str("data.test_images"),
                                    cfg.require_str("data.test_labels"));
            ds.append(test, Dataset::Split::test);
        }
        double val_frac = cfg.get_double("data.val_frac", 0.0);
        if (val_frac > 0) split_by_fraction(ds, val_frac, 0.0, seed);
        ds.validate();
        return ds;
    }
    if (kind == "csv") {
        Dataset ds = load_csv(cfg.require_str("data.csv"), cfg.get_bool("data.csv_header", false));
        split_by_fraction(ds, cfg.get_double("data.val_frac", 0.0),
                          cfg.get_double("data.test_frac", 0.2), seed);
        ds.validate();
        return ds;
    }
    throw std::runtime_error("data.kind must be tiered, idx or csv; got '" + kind + "'");
}

Dataset::Split pick_eval_split(const Dataset& ds, std::string* name) {
    for (auto [split, label] : {std::pair{Dataset::Split::test, "test"},
                                std::pair{Dataset::Split::val, "val"},
                                std::pair{Dataset::Split::train, "train"}}) {
        if (!ds.indices_of(split).empty()) {
            if (name != nullptr) *name = label;
            return split;
        }
    }
    throw std::runtime_error("dataset has no samples");
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << content;
}

std::string dataset_digest(const Dataset& ds) {
    Sha1 sha;
    sha.update(ds.features.data(), ds.features.size() * sizeof(double));
    sha.update(ds.labels.data(), ds.labels.size() * sizeof(int));
    return sha.hex_digest();
}

struct RunContext {
    fs::path out_dir;
    KvConfig cfg;
    std::string config_path;
    std::uint64_t seed = 0;
};

void write_provenance(const RunContext& ctx, const std::string& command, const Dataset& ds) {
    write_file(ctx.out_dir / "config.echo", ctx.cfg.raw_text());
    std::ostringstream man;
    man << "command " << command << "\n";
    man << "version " << kVersion << "\n";
    man << "seed " << ctx.seed << "\n";
    man << "config " << ctx.config_path << " blob " << git_blob_sha1(ctx.cfg.raw_text()) << "\n";
    man << "dataset " << ds.provenance << " sha1 " << dataset_digest(ds) << "\n";
    write_file(ctx.out_dir / "run_manifest.txt", man.str());
}

std::string format_records(const std::vector<EvalRecord>& records) {
    std::ostringstream os;
    os << "method\ttop1\tcost\traw_utility\tutility\tsamples\n";
    os << std::fixed;
    for (const auto& r : records) {
        os << r.method << "\t" << std::setprecision(2) << r.top1 << "\t" << r.avg_cost << "\t"
           << std::setprecision(6) << r.raw_utility << "\t" << r.reported_utility << "\t"
           << r.samples << "\n";
    }
    return os.str();
}

std::string json_array(const std::vector<double>& v) {
    std::ostringstream os;
    os << "[";
    os << std::setprecision(12);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ",";
        os << v[i];
    }
    os << "]";
    return os.str();
}

void write_traces_jsonl(const fs::path& path, const std::vector<TraceRow>& traces) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    for (const auto& row : traces) {
        out << "{\"i\":" << row.index << ",\"label\":" << row.label
            << ",\"pred\":" << row.predicted << ",\"steps\":" << row.steps
            << ",\"h\":" << json_array(row.trace.h) << ",\"S\":" << json_array(row.trace.S)
            << ",\"p\":" << json_array(row.trace.p) << "}\n";
    }
}

void write_curve_tsv(const fs::path& path, const std::vector<EpochLog>& curve) {
    std::ostringstream os;
    os << "stage\tepoch\tbase\tens\tcost\trank\ttotal\n";
    os << std::setprecision(8);
    for (const auto& log : curve) {
        os << log.stage << "\t" << log.epoch << "\t" << log.losses.base << "\t" << log.losses.ens
           << "\t" << log.losses.cost << "\t" << log.losses.rank << "\t" << log.losses.total
           << "\n";
    }
    write_file(path, os.str());
}

// ---------------------------------------------------------------------------
// Method closures
// ---------------------------------------------------------------------------

MethodFn halting_method(const std::vector<BaseModel>& models, const Selector& selector) {
    return [&models, &selector](const double* x, std::size_t dim) {
        auto res = infer(models, selector, x, dim, Mode::eval);
        return MethodOutput{res.pred.probs, res.pred.steps_used, res.trace};
    };
}

MethodFn single_method(const std::vector<BaseModel>& models) {
    return [&models](const double* x, std::size_t dim) {
        return MethodOutput{models[0].predict(x, dim).main_probs, 1, {}};
    };
}

MethodFn average_method(const std::vector<BaseModel>& models) {
    return [&models](const double* x, std::size_t dim) {
        return MethodOutput{average_ensemble_predict(models, x, dim), models.size(), {}};
    };
}

MethodFn woc_method(const std::vector<BaseModel>& models, double threshold) {
    return [&models, threshold](const double* x, std::size_t dim) {
        ThresholdPolicy policy{threshold, &models};
        auto [probs, steps] = threshold_cascade(policy, x, dim);
        return MethodOutput{std::move(probs), steps, {}};
    };
}

// Utility anchors from a frozen pool: the single model at cost 1 and the full
// average ensemble at cost T, measured on the given split.
UtilityConfig anchored_utility(const std::vector<BaseModel>& models, const Dataset& ds,
                               Dataset::Split split, double tau_c) {
    UtilityConfig probe;
    probe.tau_v = 1.0;
    probe.tau_c = tau_c;
    auto single = evaluate("single", ds, split, single_method(models), probe);
    auto full = evaluate("average", ds, split, average_method(models), probe);
    return make_utility_config(single.top1, full.top1, static_cast<double>(models.size()), tau_c);
}

// ---------------------------------------------------------------------------
// Checkpoint helpers
// ---------------------------------------------------------------------------

CheckpointMeta make_meta(const RunContext& ctx, const TrainConfig& tc, std::size_t stage) {
    CheckpointMeta meta;
    meta.set("seed", std::to_string(ctx.seed));
    meta.set("stage", std::to_string(stage));
    meta.set("epochs", std::to_string(tc.epochs));
    meta.set("batch", std::to_string(tc.batch_size));
    std::ostringstream w;
    w << tc.weights.w1 << "," << tc.weights.w2 << "," << tc.weights.w3;
    meta.set("loss_weights", w.str());
    std::ostringstream lr;
    lr << "base=" << tc.base_lr << ",sel=" << tc.sel_lr << ",sel_decay=" << tc.sel_stage_decay;
    meta.set("lr", lr.str());
    meta.set("lambda_dis", std::to_string(tc.lambda_dis));
    return meta;
}

TrainResult train_with_stage_checkpoints(const RunContext& ctx, const TrainConfig& tc,
                                         const Dataset& ds, bool save_stages) {
    SequentialTrainer trainer(tc, ds);
    for (std::size_t t = 1; t <= tc.stages; ++t) {
        trainer.run_stage(t);
        if (save_stages) {
            std::vector<BaseModel> trained(trainer.models().begin(),
                                           trainer.models().begin() +
                                               static_cast<std::ptrdiff_t>(t));
            save_checkpoint(trained, trainer.selector(), make_meta(ctx, tc, t),
                            (ctx.out_dir / ("checkpoint_stage" + std::to_string(t))).string());
        }
    }
    if (save_stages) {
        for (const char* ext : {".manifest", ".payload"}) {
            fs::copy_file(
                ctx.out_dir / ("checkpoint_stage" + std::to_string(tc.stages) + ext),
                ctx.out_dir / (std::string("checkpoint") + ext),
                fs::copy_options::overwrite_existing);
        }
    }
    return std::move(trainer).finish();
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_train(const RunContext& ctx, const TrainConfig& tc) {
    Dataset ds = load_dataset(ctx.cfg, ctx.seed);
    write_provenance(ctx, "train", ds);

    TrainResult result = train_with_stage_checkpoints(ctx, tc, ds, /*save_stages=*/true);
    write_curve_tsv(ctx.out_dir / "learning_curve.tsv", result.curve);

    std::string split_name;
    auto split = pick_eval_split(ds, &split_name);
    UtilityConfig ucfg = anchored_utility(result.models, ds, split,
                                          ctx.cfg.get_double("utility.tau_c", 0.01));
    std::vector<TraceRow> traces;
    std::vector<EvalRecord> records;
    records.push_back(evaluate("halting", ds, split,
                               halting_method(result.models, result.selector), ucfg, &traces));
    records.push_back(evaluate("single", ds, split, single_method(result.models), ucfg));
    records.push_back(evaluate("average", ds, split, average_method(result.models), ucfg));
    std::string table = format_records(records);
    write_file(ctx.out_dir / "records.tsv", table);
    write_traces_jsonl(ctx.out_dir / "traces.jsonl", traces);
    std::cout << "eval split: " << split_name << "\n" << table;
    return 0;
}

int cmd_eval(const RunContext& ctx, const std::string& checkpoint, const std::string& method,
             std::optional<double> threshold) {
    Dataset ds = load_dataset(ctx.cfg, ctx.seed);
    write_provenance(ctx, "eval", ds);
    Checkpoint ck = load_checkpoint(checkpoint);

    std::string split_name;
    auto split = pick_eval_split(ds, &split_name);
    UtilityConfig ucfg = anchored_utility(ck.models, ds, split,
                                          ctx.cfg.get_double("utility.tau_c", 0.01));

    MethodFn fn;
    std::string name = method;
    if (method == "halting") {
        fn = halting_method(ck.models, ck.selector);
    } else if (method == "single") {
        fn = single_method(ck.models);
    } else if (method == "average") {
        fn = average_method(ck.models);
    } else if (method == "woc") {
        if (!threshold.has_value()) {
            throw std::runtime_error(
                "eval --method woc needs --threshold (run `baseline` for a grid search)");
        }
        fn = woc_method(ck.models, *threshold);
        std::ostringstream os;
        os << "woc@" << std::setprecision(3) << *threshold;
        name = os.str();
    } else {
        throw std::runtime_error("unknown method '" + method +
                                 "' (expected halting, single, average or woc)");
    }

    std::vector<TraceRow> traces;
    auto rec = evaluate(name, ds, split, fn, ucfg, &traces);
    std::string table = format_records({rec});
    write_file(ctx.out_dir / "records.tsv", table);
    write_traces_jsonl(ctx.out_dir / "traces.jsonl", traces);
    std::cout << "eval split: " << split_name << "\n" << table;
    return 0;
}

int cmd_baseline(const RunContext& ctx, const TrainConfig& tc_in, const std::string& checkpoint,
                 std::optional<double> threshold) {
    Dataset ds = load_dataset(ctx.cfg, ctx.seed);
    write_provenance(ctx, "baseline", ds);

    // The pool: independently initialized models trained with the task loss
    // only (all joint-objective weights zero).
    std::vector<BaseModel> pool;
    Selector selector;
    if (!checkpoint.empty()) {
        Checkpoint ck = load_checkpoint(checkpoint);
        pool = std::move(ck.models);
        selector = std::move(ck.selector);
    } else {
        TrainConfig tc = tc_in;
        tc.weights = {0.0, 0.0, 0.0};
        TrainResult result = train_with_stage_checkpoints(ctx, tc, ds, /*save_stages=*/true);
        write_curve_tsv(ctx.out_dir / "learning_curve.tsv", result.curve);
        pool = std::move(result.models);
        selector = std::move(result.selector);
    }

    std::string split_name;
    auto split = pick_eval_split(ds, &split_name);
    double tau_c = ctx.cfg.get_double("utility.tau_c", 0.01);
    UtilityConfig ucfg = anchored_utility(pool, ds, split, tau_c);

    // Threshold selection on the validation split when present.
    auto val = ds.indices_of(Dataset::Split::val);
    auto search_split = !val.empty() ? Dataset::Split::val : split;
    auto search = threshold_grid_search(pool, ds, search_split, ucfg);
    {
        std::ostringstream os;
        os << "threshold\ttop1\tcost\tutility\n" << std::fixed;
        for (const auto& pt : search.grid) {
            os << std::setprecision(2) << pt.threshold << "\t" << pt.top1 << "\t" << pt.cost
               << "\t" << std::setprecision(6) << pt.reported_utility << "\n";
        }
        write_file(ctx.out_dir / "woc_grid.tsv", os.str());
    }
    double woc_threshold = threshold.value_or(search.best_threshold);

    std::vector<EvalRecord> records;
    records.push_back(evaluate("single", ds, split, single_method(pool), ucfg));
    records.push_back(evaluate("average", ds, split, average_method(pool), ucfg));
    {
        std::ostringstream os;
        os << "woc@" << std::setprecision(3) << woc_threshold;
        records.push_back(evaluate(os.str(), ds, split, woc_method(pool, woc_threshold), ucfg));
    }
    std::string table = format_records(records);
    write_file(ctx.out_dir / "records.tsv", table);

    auto hist = min_ensemble_size_histogram(pool, ds, split);
    {
        std::ostringstream os;
        os << "size\tcount\n";
        for (std::size_t k = 0; k < hist.by_size.size(); ++k)
            os << (k + 1) << "\t" << hist.by_size[k] << "\n";
        os << "never\t" << hist.never << "\n";
        write_file(ctx.out_dir / "min_size_hist.tsv", os.str());
    }
    std::cout << "eval split: " << split_name << "\n"
              << table << "woc threshold: " << woc_threshold << "\n";
    return 0;
}

// Grid specs: "w2=1e-4,1e-3,1e-2" | "T=1,2,3" | "threshold" | "random=24".
int cmd_sweep(const RunContext& ctx, const TrainConfig& tc, const std::string& grid_spec) {
    Dataset ds = load_dataset(ctx.cfg, ctx.seed);
    write_provenance(ctx, "sweep", ds);
    std::string split_name;
    auto split = pick_eval_split(ds, &split_name);
    double tau_c = ctx.cfg.get_double("utility.tau_c", 0.01);

    std::string kind = grid_spec.substr(0, grid_spec.find('='));
    std::string args =
        grid_spec.find('=') == std::string::npos ? "" : grid_spec.substr(grid_spec.find('=') + 1);
    auto split_list = [](const std::string& s) {
        std::vector<double> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
        return out;
    };

    // Anchors come from one task-loss-only pool so every grid point is scored
    // on the same scale.
    TrainConfig pool_tc = tc;
    pool_tc.weights = {0.0, 0.0, 0.0};
    if (kind == "T") {
        std::size_t max_t = 0;
        for (double v : split_list(args)) max_t = std::max(max_t, static_cast<std::size_t>(v));
        if (max_t == 0) throw std::runtime_error("sweep: empty T grid");
        pool_tc.stages = max_t;
    }
    TrainResult pool = train_sequential(pool_tc, ds);
    UtilityConfig ucfg = anchored_utility(pool.models, ds, split, tau_c);

    std::ostringstream os;
    os << "tag\tcost\ttop1\tutility\tdominated\n";
    std::vector<ParetoPoint> points;
    std::vector<double> utilities;

    auto eval_result = [&](const std::string& tag, const EvalRecord& rec) {
        points.push_back({rec.avg_cost, rec.top1, tag, false});
        utilities.push_back(rec.reported_utility);
    };

    if (kind == "w2") {
        for (double w2 : split_list(args)) {
            TrainConfig one = tc;
            one.weights.w2 = w2;
            TrainResult r = train_sequential(one, ds);
            std::ostringstream tag;
            tag << "w2=" << w2;
            eval_result(tag.str(), evaluate(tag.str(), ds, split,
                                            halting_method(r.models, r.selector), ucfg));
        }
    } else if (kind == "T") {
        for (double tv : split_list(args)) {
            TrainConfig one = tc;
            one.stages = static_cast<std::size_t>(tv);
            TrainResult r = train_sequential(one, ds);
            std::ostringstream tag;
            tag << "T=" << one.stages;
            eval_result(tag.str(), evaluate(tag.str(), ds, split,
                                            halting_method(r.models, r.selector), ucfg));
        }
    } else if (kind == "threshold") {
        auto search = threshold_grid_search(pool.models, ds, split, ucfg);
        for (const auto& pt : search.grid) {
            std::ostringstream tag;
            tag << "th=" << pt.threshold;
            points.push_back({pt.cost, pt.top1, tag.str(), false});
            utilities.push_back(pt.reported_utility);
        }
    } else if (kind == "random") {
        int trials = args.empty() ? 24 : std::stoi(args);
        for (int i = 0; i < trials; ++i) {
            Rng rng = Rng::derive(ctx.seed, "search", static_cast<std::uint64_t>(i));
            TrainConfig one = tc;
            one.sel_lr = rng.log_uniform(1e-5, 1e-1);
            const double decays[] = {0.1, 0.2, 0.5, 0.8};
            one.sel_stage_decay = decays[rng.below(4)];
            one.weights.w1 = rng.log_uniform(1e-4, 0.1);
            one.weights.w2 = rng.log_uniform(1e-5, 0.1);
            one.weights.w3 = rng.log_uniform(1e-4, 0.1);
            TrainResult r = train_sequential(one, ds);
            std::ostringstream tag;
            tag << "trial" << i << "(lr=" << std::setprecision(3) << one.sel_lr
                << ",decay=" << one.sel_stage_decay << ",w1=" << one.weights.w1
                << ",w2=" << one.weights.w2 << ",w3=" << one.weights.w3 << ")";
            eval_result(tag.str(), evaluate(tag.str(), ds, split,
                                            halting_method(r.models, r.selector), ucfg));
        }
    } else {
        throw std::runtime_error("unknown grid spec '" + grid_spec +
                                 "' (expected w2=..., T=..., threshold, random=N)");
    }

    flag_dominated(points);
    os << std::fixed;
    for (std::size_t i = 0; i < points.size(); ++i) {
        os << points[i].tag << "\t" << std::setprecision(4) << points[i].cost << "\t"
           << points[i].top1 << "\t" << std::setprecision(6) << utilities[i] << "\t"
           << (points[i].dominated ? 1 : 0) << "\n";
    }
    write_file(ctx.out_dir / "sweep.tsv", os.str());

    SvgPlot plot(kind == "T" ? "utility vs cascade length" : "cost vs top-1",
                 kind == "T" ? "T" : "cost", kind == "T" ? "utility" : "top-1 (%)");
    std::vector<double> xs, ys;
    if (kind == "T") {
        for (std::size_t i = 0; i < points.size(); ++i) {
            xs.push_back(static_cast<double>(i + 1));
            ys.push_back(utilities[i]);
        }
    } else {
        for (const auto& p : points) {
            xs.push_back(p.cost);
            ys.push_back(p.top1);
        }
    }
    plot.add_line(xs, ys, kind, "#1f77b4");
    plot.save((ctx.out_dir / "sweep.svg").string());

    std::cout << "sweep rows: " << points.size() << " (split: " << split_name << ")\n";
    return 0;
}

int cmd_report(const fs::path& out_dir) {
    bool produced = false;
    if (fs::exists(out_dir / "records.tsv")) {
        std::cout << read_file((out_dir / "records.tsv").string());
        produced = true;
    }
    if (fs::exists(out_dir / "sweep.tsv")) {
        std::ifstream in(out_dir / "sweep.tsv");
        std::string line;
        std::getline(in, line);  // header
        std::vector<double> xs, ys;
        std::vector<double> front_x, front_y;
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string tag, cost, top1, util, dominated;
            std::getline(ss, tag, '\t');
            std::getline(ss, cost, '\t');
            std::getline(ss, top1, '\t');
            std::getline(ss, util, '\t');
            std::getline(ss, dominated, '\t');
            xs.push_back(std::stod(cost));
            ys.push_back(std::stod(top1));
            if (dominated == "0") {
                front_x.push_back(std::stod(cost));
                front_y.push_back(std::stod(top1));
            }
        }
        SvgPlot plot("trade-off frontier", "cost", "top-1 (%)");
        plot.add_scatter(xs, ys, "all points", "#9ecae1");
        plot.add_line(front_x, front_y, "frontier", "#d62728");
        plot.save((out_dir / "pareto.svg").string());
        std::cout << "wrote " << (out_dir / "pareto.svg").string() << "\n";
        produced = true;
    }
    if (fs::exists(out_dir / "min_size_hist.tsv")) {
        std::ifstream in(out_dir / "min_size_hist.tsv");
        std::string line;
        std::getline(in, line);
        std::vector<std::string> labels;
        std::vector<double> values;
        while (std::getline(in, line)) {
            auto tab = line.find('\t');
            labels.push_back(line.substr(0, tab));
            values.push_back(std::stod(line.substr(tab + 1)));
        }
        SvgPlot plot("minimum ensemble size for a correct prediction", "prefix size", "");
        plot.add_bars(labels, values, "#2ca02c");
        plot.save((out_dir / "min_size_hist.svg").string());
        std::cout << "wrote " << (out_dir / "min_size_hist.svg").string() << "\n";
        produced = true;
    }
    if (fs::exists(out_dir / "learning_curve.tsv")) {
        std::ifstream in(out_dir / "learning_curve.tsv");
        std::string line;
        std::getline(in, line);
        std::vector<double> xs, base, total;
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string stage, epoch, b, e, c, r, t;
            std::getline(ss, stage, '\t');
            std::getline(ss, epoch, '\t');
            std::getline(ss, b, '\t');
            std::getline(ss, e, '\t');
            std::getline(ss, c, '\t');
            std::getline(ss, r, '\t');
            std::getline(ss, t, '\t');
            xs.push_back(static_cast<double>(xs.size() + 1));
            base.push_back(std::stod(b));
            total.push_back(std::stod(t));
        }
        SvgPlot plot("learning curve", "epoch (all stages)", "loss");
        plot.add_line(xs, base, "base", "#1f77b4");
        plot.add_line(xs, total, "total", "#ff7f0e");
        plot.save((out_dir / "learning_curve.svg").string());
        std::cout << "wrote " << (out_dir / "learning_curve.svg").string() << "\n";
        produced = true;
    }
    if (!produced) {
        throw std::runtime_error(out_dir.string() +
                                 ": nothing to report (no records.tsv, sweep.tsv, "
                                 "min_size_hist.tsv or learning_curve.tsv)");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sequential ensembles with a learned halting selector"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", method = "halting", checkpoint, grid;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::optional<std::size_t> stages_override;
    std::optional<double> threshold;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* c = cmd->add_option("--config", config_path, "flat key=value config file")
                      ->envname("SEQENS_CONFIG");
        if (needs_config) c->required();
        cmd->add_option("--out", out_dir, "output directory")->envname("SEQENS_OUT");
        cmd->add_option("--seed", seed, "root rng seed (overrides config)")
            ->envname("SEQENS_SEED")
            ->each([&](const std::string&) { seed_given = true; });
    };

    auto* train = app.add_subcommand("train", "train the cascade and selector");
    add_common(train, true);
    train->add_option("--stages", stages_override, "override train.stages")
        ->envname("SEQENS_STAGES");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    add_common(eval, true);
    eval->add_option("--checkpoint", checkpoint, "checkpoint prefix (no extension)")
        ->required()
        ->envname("SEQENS_CHECKPOINT");
    eval->add_option("--method", method, "halting | single | average | woc")
        ->envname("SEQENS_METHOD");
    eval->add_option("--threshold", threshold, "confidence threshold for woc")
        ->envname("SEQENS_THRESHOLD");

    auto* baseline = app.add_subcommand("baseline", "train/evaluate the reference methods");
    add_common(baseline, true);
    baseline->add_option("--checkpoint", checkpoint, "reuse an existing pool checkpoint")
        ->envname("SEQENS_CHECKPOINT");
    baseline->add_option("--stages", stages_override, "override train.stages")
        ->envname("SEQENS_STAGES");
    baseline->add_option("--threshold", threshold, "fixed cascade threshold (skips grid search)")
        ->envname("SEQENS_THRESHOLD");

    auto* sweep = app.add_subcommand("sweep", "evaluate a grid of trade-off settings");
    add_common(sweep, true);
    sweep->add_option("--grid", grid, "w2=v1,v2,... | T=1,2,3 | threshold | random=N")
        ->required()
        ->envname("SEQENS_GRID");
    sweep->add_option("--stages", stages_override, "override train.stages")
        ->envname("SEQENS_STAGES");

    auto* report = app.add_subcommand("report", "render plots from a run directory");
    report->add_option("--out", out_dir, "run directory to render")->envname("SEQENS_OUT");

    CLI11_PARSE(app, argc, argv);

    try {
        if (report->parsed()) return cmd_report(out_dir);

        RunContext ctx;
        ctx.cfg = KvConfig::parse_file(config_path);
        validate_config_keys(ctx.cfg);
        ctx.config_path = config_path;
        ctx.seed = seed_given ? seed : ctx.cfg.get_u64("seed", 0);
        ctx.out_dir = out_dir;
        fs::create_directories(ctx.out_dir);

        TrainConfig tc = load_train_config(ctx.cfg);
        tc.seed = ctx.seed;
        if (stages_override.has_value()) tc.stages = *stages_override;
        tc.validate();

        if (train->parsed()) return cmd_train(ctx, tc);
        if (eval->parsed()) return cmd_eval(ctx, checkpoint, method, threshold);
        if (baseline->parsed()) return cmd_baseline(ctx, tc, checkpoint, threshold);
        if (sweep->parsed()) return cmd_sweep(ctx, tc, grid);
        throw std::runtime_error("no subcommand");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
