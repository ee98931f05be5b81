#include "shadowlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace shadowlab::svg {

namespace {
std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string tick(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else if (c == '&')
            out += "&amp;";
        else
            out += c;
    }
    return out;
}
}  // namespace

std::string render(const Plot& plot, int width, int height) {
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    auto tx = [&](double v) { return plot.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return plot.log_y ? std::log10(v) : v; };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : plot.series)
        for (auto [x, y] : s.points) {
            if ((plot.log_x && !(x > 0)) || (plot.log_y && !(y > 0))) continue;
            if (!std::isfinite(tx(x)) || !std::isfinite(ty(y))) continue;
            x0 = std::min(x0, tx(x));
            x1 = std::max(x1, tx(x));
            y0 = std::min(y0, ty(y));
            y1 = std::max(y1, ty(y));
        }
    if (!(x1 >= x0)) x0 = 0, x1 = 1;
    if (!(y1 >= y0)) y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return mt + ph - (ty(v) - y0) / (y1 - y0) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(width / 2.0) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << escape(plot.title) << "</text>\n";
    os << "<rect x=\"" << num(ml) << "\" y=\"" << num(mt) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
        const double vx = plot.log_x ? std::pow(10.0, fx) : fx, vy = plot.log_y ? std::pow(10.0, fy) : fy;
        os << "<text x=\"" << num(ml + pw * i / 4.0) << "\" y=\"" << num(mt + ph + 18)
           << "\" text-anchor=\"middle\" font-size=\"11\">" << tick(vx) << "</text>\n";
        os << "<text x=\"" << num(ml - 6) << "\" y=\"" << num(mt + ph - ph * i / 4.0 + 4)
           << "\" text-anchor=\"end\" font-size=\"11\">" << tick(vy) << "</text>\n";
    }
    os << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << num(height - 10.0) << "\" text-anchor=\"middle\" font-size=\"12\">"
       << escape(plot.x_label) << "</text>\n";
    os << "<text x=\"14\" y=\"" << num(mt + ph / 2) << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
       << num(mt + ph / 2) << ")\">" << escape(plot.y_label) << "</text>\n";
    int legend = 0;
    for (const auto& s : plot.series) {
        if (s.line) {
            os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" points=\"";
            bool first = true;
            for (auto [x, y] : s.points) {
                if ((plot.log_x && !(x > 0)) || (plot.log_y && !(y > 0))) continue;
                os << (first ? "" : " ") << num(px(x)) << ',' << num(py(y));
                first = false;
            }
            os << "\"/>\n";
        } else {
            for (auto [x, y] : s.points) {
                if ((plot.log_x && !(x > 0)) || (plot.log_y && !(y > 0))) continue;
                os << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"3\" fill=\"" << s.color
                   << "\"/>\n";
            }
        }
        if (!s.label.empty()) {
            os << "<text x=\"" << num(ml + 10) << "\" y=\"" << num(mt + 16 + 14 * legend) << "\" font-size=\"11\" fill=\""
               << s.color << "\">" << escape(s.label) << "</text>\n";
            ++legend;
        }
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace shadowlab::svg
