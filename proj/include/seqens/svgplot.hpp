#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqens {

// Minimal static SVG renderer for the report command: line/scatter series on
// auto-scaled axes, plus vertical bar charts. Output is deterministic.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

    void add_line(const std::vector<double>& xs, const std::vector<double>& ys,
                  const std::string& label, const std::string& color) {
        add_series(xs, ys, label, color, /*line=*/true);
    }

    void add_scatter(const std::vector<double>& xs, const std::vector<double>& ys,
                     const std::string& label, const std::string& color) {
        add_series(xs, ys, label, color, /*line=*/false);
    }

    void add_bars(const std::vector<std::string>& labels, const std::vector<double>& values,
                  const std::string& color) {
        bar_labels_ = labels;
        bar_values_ = values;
        bar_color_ = color;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error(path + ": cannot open for writing");
        out << render();
    }

    std::string render() const {
        std::ostringstream s;
        s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
          << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
        s << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
        s << text(kW / 2, 24, title_, 16, "middle");
        if (!bar_values_.empty()) {
            render_bars(s);
        } else {
            render_series(s);
        }
        s << "</svg>\n";
        return s.str();
    }

private:
    struct Series {
        std::vector<double> xs, ys;
        std::string label, color;
        bool line = true;
    };

    static constexpr int kW = 640, kH = 440;
    static constexpr int kLeft = 70, kRight = 24, kTop = 44, kBottom = 56;

    void add_series(const std::vector<double>& xs, const std::vector<double>& ys,
                    const std::string& label, const std::string& color, bool line) {
        if (xs.size() != ys.size()) throw std::invalid_argument("svg: series length mismatch");
        series_.push_back({xs, ys, label, color, line});
    }

    static std::string text(double x, double y, const std::string& t, int size,
                            const std::string& anchor) {
        std::ostringstream s;
        s << "<text x=\"" << x << "\" y=\"" << y << "\" font-family=\"sans-serif\" font-size=\""
          << size << "\" text-anchor=\"" << anchor << "\">" << t << "</text>\n";
        return s.str();
    }

    static std::string fmt(double v) {
        std::ostringstream s;
        s.precision(4);
        s << v;
        return s.str();
    }

    void render_series(std::ostringstream& s) const {
        double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
        bool first = true;
        for (const auto& sr : series_) {
            for (std::size_t i = 0; i < sr.xs.size(); ++i) {
                if (first) {
                    xmin = xmax = sr.xs[i];
                    ymin = ymax = sr.ys[i];
                    first = false;
                }
                xmin = std::min(xmin, sr.xs[i]);
                xmax = std::max(xmax, sr.xs[i]);
                ymin = std::min(ymin, sr.ys[i]);
                ymax = std::max(ymax, sr.ys[i]);
            }
        }
        if (xmax - xmin < 1e-12) {
            xmin -= 0.5;
            xmax += 0.5;
        }
        if (ymax - ymin < 1e-12) {
            ymin -= 0.5;
            ymax += 0.5;
        }
        double xpad = 0.05 * (xmax - xmin), ypad = 0.08 * (ymax - ymin);
        xmin -= xpad;
        xmax += xpad;
        ymin -= ypad;
        ymax += ypad;
        auto px = [&](double x) {
            return kLeft + (x - xmin) / (xmax - xmin) * (kW - kLeft - kRight);
        };
        auto py = [&](double y) {
            return kH - kBottom - (y - ymin) / (ymax - ymin) * (kH - kTop - kBottom);
        };

        axes(s, xmin, xmax, ymin, ymax, px, py);
        int legend_y = kTop + 8;
        for (const auto& sr : series_) {
            if (sr.line && sr.xs.size() > 1) {
                std::ostringstream pts;
                for (std::size_t i = 0; i < sr.xs.size(); ++i)
                    pts << px(sr.xs[i]) << "," << py(sr.ys[i]) << " ";
                s << "<polyline fill=\"none\" stroke=\"" << sr.color
                  << "\" stroke-width=\"1.6\" points=\"" << pts.str() << "\"/>\n";
            }
            for (std::size_t i = 0; i < sr.xs.size(); ++i) {
                s << "<circle cx=\"" << px(sr.xs[i]) << "\" cy=\"" << py(sr.ys[i])
                  << "\" r=\"3\" fill=\"" << sr.color << "\"/>\n";
            }
            if (!sr.label.empty()) {
                s << "<circle cx=\"" << kLeft + 12 << "\" cy=\"" << legend_y << "\" r=\"4\" fill=\""
                  << sr.color << "\"/>\n";
                s << text(kLeft + 22, legend_y + 4, sr.label, 12, "start");
                legend_y += 18;
            }
        }
    }

    template <class Px, class Py>
    void axes(std::ostringstream& s, double xmin, double xmax, double ymin, double ymax, Px px,
              Py py) const {
        s << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight
          << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n";
        s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
          << kH - kBottom << "\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            double fx = xmin + (xmax - xmin) * i / 4.0;
            double fy = ymin + (ymax - ymin) * i / 4.0;
            s << "<line x1=\"" << px(fx) << "\" y1=\"" << kH - kBottom << "\" x2=\"" << px(fx)
              << "\" y2=\"" << kH - kBottom + 5 << "\" stroke=\"black\"/>\n";
            s << text(px(fx), kH - kBottom + 20, fmt(fx), 11, "middle");
            s << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << kLeft
              << "\" y2=\"" << py(fy) << "\" stroke=\"black\"/>\n";
            s << text(kLeft - 8, py(fy) + 4, fmt(fy), 11, "end");
        }
        s << text(kW / 2, kH - 12, x_label_, 13, "middle");
        s << "<text x=\"18\" y=\"" << kH / 2
          << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
             "transform=\"rotate(-90 18 "
          << kH / 2 << ")\">" << y_label_ << "</text>\n";
    }

    void render_bars(std::ostringstream& s) const {
        double vmax = *std::max_element(bar_values_.begin(), bar_values_.end());
        if (vmax <= 0) vmax = 1;
        const std::size_t n = bar_values_.size();
        const double span = static_cast<double>(kW - kLeft - kRight);
        const double bw = span / static_cast<double>(n);
        s << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight
          << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n";
        for (std::size_t i = 0; i < n; ++i) {
            double h = bar_values_[i] / vmax * (kH - kTop - kBottom);
            double x = kLeft + bw * static_cast<double>(i) + bw * 0.125;
            s << "<rect x=\"" << x << "\" y=\"" << kH - kBottom - h << "\" width=\"" << bw * 0.75
              << "\" height=\"" << h << "\" fill=\"" << bar_color_ << "\"/>\n";
            s << text(x + bw * 0.375, kH - kBottom + 18, bar_labels_[i], 12, "middle");
            s << text(x + bw * 0.375, kH - kBottom - h - 6, fmt(bar_values_[i]), 11, "middle");
        }
        s << text(kW / 2, kH - 12, x_label_, 13, "middle");
    }

    std::string title_, x_label_, y_label_;
    std::vector<Series> series_;
    std::vector<std::string> bar_labels_;
    std::vector<double> bar_values_;
    std::string bar_color_;
};

}  // namespace seqens
