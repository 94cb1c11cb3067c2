#include "eclf/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string_view>

namespace eclf::svg {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
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

}  // namespace

std::string line_chart(const std::vector<Panel>& panels, const std::vector<std::string>& x_labels, int width,
                       int panel_height, int label_step) {
    constexpr double left = 70.0;
    constexpr double right = 150.0;
    constexpr double top = 28.0;
    constexpr double bottom = 30.0;
    const double plot_w = width - left - right;
    const double plot_h = panel_height - top - bottom;
    const int height = panel_height * static_cast<int>(std::max<std::size_t>(panels.size(), 1));

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                      "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t p = 0; p < panels.size(); ++p) {
        const auto& panel = panels[p];
        const double y0 = static_cast<double>(p) * panel_height;
        double x_min = std::numeric_limits<double>::infinity();
        double x_max = -x_min;
        double v_min = x_min;
        double v_max = -x_min;
        for (const auto& t : panel.tracks) {
            if (t.values.empty()) continue;
            x_min = std::min(x_min, t.first_x);
            x_max = std::max(x_max, t.first_x + static_cast<double>(t.values.size() - 1));
            for (double v : t.values) {
                v_min = std::min(v_min, v);
                v_max = std::max(v_max, v);
            }
        }
        if (!std::isfinite(x_min)) continue;
        if (x_max == x_min) x_max = x_min + 1.0;
        if (v_max == v_min) {
            v_max += 1.0;
            v_min -= 1.0;
        }
        const auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
        const auto sy = [&](double v) { return y0 + top + (v_max - v) / (v_max - v_min) * plot_h; };

        out += "<text x=\"" + num(left) + "\" y=\"" + num(y0 + 18) + "\" font-size=\"13\">" + escape(panel.title) +
               "</text>\n";
        out += "<rect x=\"" + num(left) + "\" y=\"" + num(y0 + top) + "\" width=\"" + num(plot_w) + "\" height=\"" +
               num(plot_h) + "\" fill=\"none\" stroke=\"#444\"/>\n";
        out += "<text x=\"" + num(left - 6) + "\" y=\"" + num(y0 + top + 4) + "\" text-anchor=\"end\">" +
               num(v_max) + "</text>\n";
        out += "<text x=\"" + num(left - 6) + "\" y=\"" + num(y0 + top + plot_h) + "\" text-anchor=\"end\">" +
               num(v_min) + "</text>\n";
        if (v_min < 0.0 && v_max > 0.0) {
            out += "<line x1=\"" + num(left) + "\" y1=\"" + num(sy(0.0)) + "\" x2=\"" + num(left + plot_w) +
                   "\" y2=\"" + num(sy(0.0)) + "\" stroke=\"#bbb\" stroke-dasharray=\"3,3\"/>\n";
        }
        for (std::size_t i = 0; i < x_labels.size(); i += static_cast<std::size_t>(std::max(label_step, 1))) {
            const double x = static_cast<double>(i);
            if (x < x_min || x > x_max) continue;
            out += "<line x1=\"" + num(sx(x)) + "\" y1=\"" + num(y0 + top + plot_h) + "\" x2=\"" + num(sx(x)) +
                   "\" y2=\"" + num(y0 + top + plot_h + 4) + "\" stroke=\"#444\"/>\n";
            out += "<text x=\"" + num(sx(x)) + "\" y=\"" + num(y0 + top + plot_h + 16) +
                   "\" text-anchor=\"middle\">" + escape(x_labels[i]) + "</text>\n";
        }
        for (std::size_t k = 0; k < panel.tracks.size(); ++k) {
            const auto& t = panel.tracks[k];
            if (t.values.empty()) continue;
            std::string pts;
            for (std::size_t i = 0; i < t.values.size(); ++i) {
                if (i) pts += ' ';
                pts += num(sx(t.first_x + static_cast<double>(i))) + "," + num(sy(t.values[i]));
            }
            out += "<polyline fill=\"none\" stroke=\"" + escape(t.color) + "\" stroke-width=\"1.5\" points=\"" + pts +
                   "\"/>\n";
            const double ly = y0 + top + 12.0 + 16.0 * static_cast<double>(k);
            out += "<line x1=\"" + num(left + plot_w + 10) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
                   num(left + plot_w + 30) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + escape(t.color) +
                   "\" stroke-width=\"2\"/>\n";
            out += "<text x=\"" + num(left + plot_w + 35) + "\" y=\"" + num(ly) + "\">" + escape(t.label) +
                   "</text>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace eclf::svg
