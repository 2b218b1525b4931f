#include "gfsim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gfsim/report.hpp"

namespace gfs {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 50.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

struct Series {
    std::string label;
    std::vector<double> y;
};

struct PlotData {
    std::string title;
    std::string y_label;
    std::vector<Series> series;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Round tick spacing to 1/2/5 decades covering roughly `target` intervals.
double nice_step(double span, int target) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) return m * mag;
    }
    return 10.0 * mag;
}

PlotData collect(const SimResult& result, const std::string& group) {
    PlotData data;
    const std::size_t n = result.unit_ids.size();
    if (group == "angle-diff") {
        data.title = "Angle differences";
        data.y_label = "angle difference (deg)";
        for (std::size_t i = 1; i < n; ++i) {
            Series s;
            s.label = result.unit_ids[i] + "-" + result.unit_ids[0];
            s.y.resize(result.samples());
            for (std::size_t k = 0; k < result.samples(); ++k) {
                s.y[k] = (result.delta_rad[i][k] - result.delta_rad[0][k]) * 180.0 /
                         std::numbers::pi;
            }
            data.series.push_back(std::move(s));
        }
    } else if (group == "freq-coi") {
        data.title = "Frequency deviations from the centre of inertia";
        data.y_label = "frequency deviation (pu)";
        for (std::size_t i = 0; i < n; ++i) {
            Series s;
            s.label = result.unit_ids[i];
            s.y.resize(result.samples());
            for (std::size_t k = 0; k < result.samples(); ++k) {
                s.y[k] = (1.0 + result.domega_pu[i][k]) - result.omega_coi_pu[k];
            }
            data.series.push_back(std::move(s));
        }
    } else if (group == "boost") {
        data.title = "Supplementary voltage set points";
        data.y_label = "set-point increment (pu)";
        for (std::size_t i = 0; i < n; ++i) {
            data.series.push_back({result.unit_ids[i], result.dv_boost_pu[i]});
        }
    } else if (group == "power") {
        data.title = "Active-power injections";
        data.y_label = "active power (pu)";
        for (std::size_t i = 0; i < n; ++i) {
            data.series.push_back({result.unit_ids[i], result.p_g_pu[i]});
        }
    } else if (group == "voltage") {
        data.title = "Terminal voltages";
        data.y_label = "voltage (pu)";
        for (std::size_t i = 0; i < n; ++i) {
            data.series.push_back({result.unit_ids[i], result.v_g_pu[i]});
        }
    } else {
        throw std::invalid_argument("unknown plot group '" + group + "'");
    }
    return data;
}

}  // namespace

const std::vector<std::string>& plot_groups() {
    static const std::vector<std::string> groups = {"angle-diff", "freq-coi", "boost", "power",
                                                    "voltage"};
    return groups;
}

std::string render_plot(const SimResult& result, const std::string& group) {
    if (result.samples() < 2) throw std::invalid_argument("result has too few samples to plot");
    PlotData data = collect(result, group);

    const double t0 = result.time_s.front();
    const double t1 = result.time_s.back();
    double y0 = 0.0;
    double y1 = 0.0;
    bool first = true;
    for (const auto& s : data.series) {
        for (double v : s.y) {
            if (!std::isfinite(v)) continue;
            if (first) {
                y0 = y1 = v;
                first = false;
            }
            y0 = std::min(y0, v);
            y1 = std::max(y1, v);
        }
    }
    if (first) {
        y0 = -1.0;
        y1 = 1.0;
    }
    if (y1 - y0 < 1e-9) {
        y0 -= 1.0;
        y1 += 1.0;
    }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto sx = [&](double t) { return kLeft + (t - t0) / (t1 - t0) * pw; };
    auto sy = [&](double v) { return kTop + (y1 - v) / (y1 - y0) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kLeft << "\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" "
           "font-weight=\"bold\">"
        << data.title << "</text>\n";

    // Frame and grid
    const double x_step = nice_step(t1 - t0, 8);
    const double y_step = nice_step(y1 - y0, 6);
    svg << "<g stroke=\"#cccccc\" stroke-width=\"1\">\n";
    for (double t = std::ceil(t0 / x_step) * x_step; t <= t1 + 1e-12; t += x_step) {
        svg << "<line x1=\"" << fmt(sx(t)) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(sx(t))
            << "\" y2=\"" << fmt(kTop + ph) << "\"/>\n";
    }
    for (double v = std::ceil(y0 / y_step) * y_step; v <= y1 + 1e-12; v += y_step) {
        svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(sy(v)) << "\" x2=\""
            << fmt(kLeft + pw) << "\" y2=\"" << fmt(sy(v)) << "\"/>\n";
    }
    svg << "</g>\n";
    svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\""
        << ph << "\" fill=\"none\" stroke=\"black\"/>\n";

    // Tick labels
    svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
    for (double t = std::ceil(t0 / x_step) * x_step; t <= t1 + 1e-12; t += x_step) {
        svg << "<text x=\"" << fmt(sx(t)) << "\" y=\"" << fmt(kTop + ph + 16)
            << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
    }
    for (double v = std::ceil(y0 / y_step) * y_step; v <= y1 + 1e-12; v += y_step) {
        svg << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(sy(v) + 4)
            << "\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
    }
    svg << "</g>\n";
    svg << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 12)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">time (s)"
           "</text>\n";
    svg << "<text x=\"16\" y=\"" << fmt(kTop + ph / 2)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 16 "
        << fmt(kTop + ph / 2) << ")\">" << data.y_label << "</text>\n";

    // Series
    for (std::size_t s = 0; s < data.series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < result.samples(); ++k) {
            const double v = data.series[s].y[k];
            if (!std::isfinite(v)) continue;
            svg << fmt(sx(result.time_s[k])) << ',' << fmt(sy(v)) << ' ';
        }
        svg << "\"/>\n";
    }
    // Legend
    for (std::size_t s = 0; s < data.series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        const double lx = kLeft + pw - 130;
        const double ly = kTop + 16 + 16 * static_cast<double>(s);
        svg << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(lx + 22)
            << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << fmt(lx + 28) << "\" y=\"" << fmt(ly)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << data.series[s].label
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::vector<std::string> emit_plots(const SimResult& result, const std::vector<std::string>& groups,
                                    const std::string& out_dir) {
    std::vector<std::string> written;
    for (const auto& group : groups) {
        const std::string svg = render_plot(result, group);
        const std::string path = out_dir + "/" + group + ".svg";
        write_text_file(path, svg);
        written.push_back(path);
    }
    return written;
}

}  // namespace gfs
