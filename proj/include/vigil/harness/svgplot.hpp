#pragma once

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "vigil/harness/bench.hpp"

namespace vigil::harness {

// Static bar chart of per-label means with p95 whiskers. SVG keeps the
// toolchain dependency-free and diffs cleanly in review.
inline std::string render_svg_bars(const std::string& title,
                                   const std::vector<BenchSummary>& summaries) {
    const int width = 860, height = 420;
    const int margin_left = 90, margin_bottom = 70, margin_top = 50, margin_right = 20;
    const int plot_w = width - margin_left - margin_right;
    const int plot_h = height - margin_top - margin_bottom;

    double max_value = 1.0;
    for (const auto& s : summaries) max_value = std::max(max_value, s.p95_us);

    auto y_of = [&](double v) { return margin_top + plot_h * (1.0 - v / max_value); };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << width / 2 << "' y='28' text-anchor='middle' font-size='18' "
           "font-family='sans-serif'>"
        << title << "</text>\n";

    // Axis and gridlines.
    svg << "<line x1='" << margin_left << "' y1='" << margin_top << "' x2='" << margin_left
        << "' y2='" << margin_top + plot_h << "' stroke='black'/>\n";
    svg << "<line x1='" << margin_left << "' y1='" << margin_top + plot_h << "' x2='"
        << margin_left + plot_w << "' y2='" << margin_top + plot_h << "' stroke='black'/>\n";
    for (int i = 0; i <= 4; ++i) {
        double v = max_value * i / 4;
        int y = static_cast<int>(y_of(v));
        svg << "<line x1='" << margin_left - 4 << "' y1='" << y << "' x2='" << margin_left + plot_w
            << "' y2='" << y << "' stroke='#dddddd'/>\n";
        svg << "<text x='" << margin_left - 8 << "' y='" << y + 4
            << "' text-anchor='end' font-size='11' font-family='sans-serif'>" << std::fixed
            << std::setprecision(v < 10 ? 1 : 0) << v << "</text>\n";
    }
    svg << "<text x='14' y='" << margin_top + plot_h / 2
        << "' font-size='12' font-family='sans-serif' transform='rotate(-90 14 "
        << margin_top + plot_h / 2 << ")' text-anchor='middle'>microseconds</text>\n";

    const char* palette[] = {"#4878a8", "#e49444", "#5ba053", "#c85a5a", "#8570b0", "#767676"};
    std::size_t n = summaries.size();
    if (n > 0) {
        double slot = static_cast<double>(plot_w) / n;
        double bar_w = slot * 0.6;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& s = summaries[i];
            double x = margin_left + slot * i + (slot - bar_w) / 2;
            double y = y_of(s.mean_us);
            svg << "<rect x='" << x << "' y='" << y << "' width='" << bar_w << "' height='"
                << (margin_top + plot_h - y) << "' fill='" << palette[i % 6] << "'/>\n";
            // p95 whisker
            double xc = x + bar_w / 2;
            svg << "<line x1='" << xc << "' y1='" << y_of(s.p95_us) << "' x2='" << xc << "' y2='"
                << y << "' stroke='black'/>\n";
            svg << "<line x1='" << xc - 5 << "' y1='" << y_of(s.p95_us) << "' x2='" << xc + 5
                << "' y2='" << y_of(s.p95_us) << "' stroke='black'/>\n";
            std::string label = s.label;
            if (s.size_bytes > 0) label += " (" + std::to_string(s.size_bytes) + "B)";
            svg << "<text x='" << xc << "' y='" << margin_top + plot_h + 16
                << "' text-anchor='middle' font-size='11' font-family='sans-serif'>" << label
                << "</text>\n";
            std::ostringstream mean;
            mean << std::fixed << std::setprecision(s.mean_us < 100 ? 1 : 0) << s.mean_us;
            svg << "<text x='" << xc << "' y='" << margin_top + plot_h + 32
                << "' text-anchor='middle' font-size='10' font-family='sans-serif' "
                   "fill='#555555'>"
                << mean.str() << " us</text>\n";
        }
    }
    svg << "<text x='" << width / 2 << "' y='" << height - 12
        << "' text-anchor='middle' font-size='11' font-family='sans-serif' fill='#555555'>bar = "
           "mean, whisker = p95, runs per bar = "
        << (summaries.empty() ? 0 : summaries.front().runs) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

inline void write_svg_file(const std::string& path, const std::string& svg) {
    std::ofstream out(path);
    if (!out) throw BenchConfigError("cannot write " + path);
    out << svg;
}

}  // namespace vigil::harness
