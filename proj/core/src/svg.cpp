#include "patchlens/svg.hpp"

#include "patchlens/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace patchlens::svg {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 55;

std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    // Avoid "-0.00" so output does not depend on the sign of zero.
    std::string s(buf);
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
    return s;
}

std::string tick_label(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
        if (hi - lo <= 0.0) {
            const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.05;
            lo -= pad;
            hi += pad;
        }
    }
};

}  // namespace

std::string render(const PlotSpec& spec, const std::vector<Series>& series) {
    Range xr, yr;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw InvalidArgument("svg: series x/y lengths differ");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xr.include(s.x[i]);
            yr.include(s.y[i]);
        }
    }
    xr.finish();
    yr.finish();

    const double plot_w = spec.width - kMarginLeft - kMarginRight;
    const double plot_h = spec.height - kMarginTop - kMarginBottom;
    auto px = [&](double x) { return kMarginLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    auto py = [&](double y) { return kMarginTop + (1.0 - (y - yr.lo) / (yr.hi - yr.lo)) * plot_h; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) + "\" height=\"" +
           std::to_string(spec.height) + "\" viewBox=\"0 0 " + std::to_string(spec.width) + " " +
           std::to_string(spec.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!spec.title.empty())
        out += "<text x=\"" + fixed(spec.width / 2.0) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
               escape(spec.title) + "</text>\n";

    const std::string x0 = fixed(kMarginLeft), x1 = fixed(kMarginLeft + plot_w);
    const std::string y0 = fixed(kMarginTop + plot_h), y1 = fixed(kMarginTop);
    out += "<g stroke=\"black\" stroke-width=\"1\">\n";
    out += "<line x1=\"" + x0 + "\" y1=\"" + y0 + "\" x2=\"" + x1 + "\" y2=\"" + y0 + "\"/>\n";
    out += "<line x1=\"" + x0 + "\" y1=\"" + y0 + "\" x2=\"" + x0 + "\" y2=\"" + y1 + "\"/>\n";
    out += "</g>\n";

    constexpr int kTicks = 5;
    out += "<g fill=\"black\">\n";
    for (int i = 0; i <= kTicks; ++i) {
        const double fx = xr.lo + (xr.hi - xr.lo) * i / kTicks;
        const double fy = yr.lo + (yr.hi - yr.lo) * i / kTicks;
        out += "<line x1=\"" + fixed(px(fx)) + "\" y1=\"" + y0 + "\" x2=\"" + fixed(px(fx)) + "\" y2=\"" +
               fixed(kMarginTop + plot_h + 5) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + fixed(px(fx)) + "\" y=\"" + fixed(kMarginTop + plot_h + 18) +
               "\" text-anchor=\"middle\">" + tick_label(fx) + "</text>\n";
        out += "<line x1=\"" + fixed(kMarginLeft - 5) + "\" y1=\"" + fixed(py(fy)) + "\" x2=\"" + x0 + "\" y2=\"" +
               fixed(py(fy)) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + fixed(kMarginLeft - 8) + "\" y=\"" + fixed(py(fy) + 4) + "\" text-anchor=\"end\">" +
               tick_label(fy) + "</text>\n";
    }
    out += "</g>\n";
    if (!spec.x_label.empty())
        out += "<text x=\"" + fixed(kMarginLeft + plot_w / 2) + "\" y=\"" + fixed(spec.height - 12.0) +
               "\" text-anchor=\"middle\">" + escape(spec.x_label) + "</text>\n";
    if (!spec.y_label.empty())
        out += "<text x=\"16\" y=\"" + fixed(kMarginTop + plot_h / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
               fixed(kMarginTop + plot_h / 2) + ")\">" + escape(spec.y_label) + "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const std::string color = kPalette[si % std::size(kPalette)];
        if (s.style == SeriesStyle::line) {
            out += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"";
            bool first = true;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                if (!first) out += ' ';
                out += fixed(px(s.x[i])) + "," + fixed(py(s.y[i]));
                first = false;
            }
            out += "\"/>\n";
        } else {
            out += "<g fill=\"" + color + "\" fill-opacity=\"0.6\">\n";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                out += "<circle cx=\"" + fixed(px(s.x[i])) + "\" cy=\"" + fixed(py(s.y[i])) + "\" r=\"2\"/>\n";
            }
            out += "</g>\n";
        }
        if (!s.label.empty()) {
            const double ly = kMarginTop + 14.0 + 16.0 * static_cast<double>(si);
            const double lx = kMarginLeft + plot_w - 150.0;
            out += "<rect x=\"" + fixed(lx) + "\" y=\"" + fixed(ly - 9) + "\" width=\"10\" height=\"10\" fill=\"" + color +
                   "\"/>\n";
            out += "<text x=\"" + fixed(lx + 14) + "\" y=\"" + fixed(ly) + "\">" + escape(s.label) + "</text>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace patchlens::svg
