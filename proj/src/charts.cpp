#include "attisim/charts.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace attisim {

namespace {

constexpr double kWidth = 800;
constexpr double kHeight = 480;
constexpr double kLeft = 70;
constexpr double kRight = 180;  // legend column
constexpr double kTop = 40;
constexpr double kBottom = 50;

struct Frame {
    double x0, x1, y0, y1;  // data ranges

    double px(double x) const {
        const double span = x1 > x0 ? x1 - x0 : 1.0;
        const double w = kWidth - kLeft - kRight;
        return x1 > x0 ? kLeft + (x - x0) / span * w : kLeft + w / 2;
    }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::string escape(const std::string& s) {
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

std::string header(const std::string& title) {
    return fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
        "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"24\" font-size=\"16\">{3}</text>\n",
        kWidth, kHeight, kLeft, escape(title));
}

std::string axes(const Frame& f, const std::vector<int>& years, const std::vector<double>& yticks,
                 const std::string& ylabel) {
    std::string out;
    const double bottom = kHeight - kBottom;
    const double right = kWidth - kRight;
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", kLeft, kTop, bottom);
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", kLeft, bottom, right);
    for (double t : yticks) {
        out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#dddddd\"/>\n",
                           kLeft, f.py(t), right);
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6, f.py(t) + 4, t);
    }
    const std::size_t stride = years.size() > 12 ? 2 : 1;
    for (std::size_t i = 0; i < years.size(); i += stride) {
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", f.px(years[i]),
                           bottom + 18, years[i]);
    }
    out += fmt::format(
        "<text x=\"18\" y=\"{:.2f}\" transform=\"rotate(-90 18 {:.2f})\" text-anchor=\"middle\">{}</text>\n",
        (kTop + bottom) / 2, (kTop + bottom) / 2, escape(ylabel));
    return out;
}

std::string polyline(const Frame& f, const std::vector<std::pair<int, double>>& pts, const std::string& color,
                     bool dashed, const std::string& id) {
    std::string points;
    for (const auto& [x, y] : pts) {
        if (!points.empty()) points += ' ';
        points += fmt::format("{:.2f},{:.2f}", f.px(x), f.py(y));
    }
    return fmt::format("<polyline id=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{} points=\"{}\"/>\n", id,
                       color, dashed ? " stroke-dasharray=\"6,4\"" : "", points);
}

std::string legend(const std::vector<std::tuple<std::string, std::string, bool>>& entries) {
    std::string out;
    double y = kTop + 10;
    const double x = kWidth - kRight + 20;
    for (const auto& [label, color, dashed] : entries) {
        out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
                           "stroke-width=\"2\"{}/>\n",
                           x, y, x + 24, y, color, dashed ? " stroke-dasharray=\"6,4\"" : "");
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", x + 30, y + 4, escape(label));
        y += 20;
    }
    return out;
}

std::vector<int> years_of(const std::vector<YearlyResult>& results) {
    std::vector<int> out;
    for (const auto& r : results) out.push_back(r.year);
    return out;
}

Frame year_frame(const std::vector<int>& years, double y0, double y1) {
    const double x0 = years.empty() ? 0 : years.front();
    const double x1 = years.empty() ? 1 : years.back();
    return {x0, x1, y0, y1};
}

}  // namespace

std::string favorability_svg(const std::vector<YearlyResult>& results, const GroundTruthSeries& gt) {
    const auto years = years_of(results);
    const Frame f = year_frame(years, 0, 100);
    std::string out = header("Favorable vs unfavorable attitudes");
    out += axes(f, years, {0, 25, 50, 75, 100}, "percent of agents");

    std::vector<std::pair<int, double>> fav, unfav, gt_fav, gt_unfav;
    for (const auto& r : results) {
        fav.emplace_back(r.year, r.favorable_pct);
        unfav.emplace_back(r.year, r.unfavorable_pct);
        auto it = gt.find(r.year);
        if (it != gt.end()) {
            gt_fav.emplace_back(r.year, it->second.favorable_pct);
            gt_unfav.emplace_back(r.year, it->second.unfavorable_pct);
        }
    }
    std::vector<std::tuple<std::string, std::string, bool>> entries{{"simulated favorable", "#1f77b4", false},
                                                                    {"simulated unfavorable", "#d62728", false}};
    out += polyline(f, fav, "#1f77b4", false, "sim-favorable");
    out += polyline(f, unfav, "#d62728", false, "sim-unfavorable");
    if (!gt_fav.empty()) {
        out += polyline(f, gt_fav, "#1f77b4", true, "gt-favorable");
        out += polyline(f, gt_unfav, "#d62728", true, "gt-unfavorable");
        entries.emplace_back("survey favorable", "#1f77b4", true);
        entries.emplace_back("survey unfavorable", "#d62728", true);
    }
    out += legend(entries);
    out += "</svg>\n";
    return out;
}

std::string mean_score_svg(const std::vector<YearlyResult>& results) {
    const auto years = years_of(results);
    const Frame f = year_frame(years, 1, 4);
    std::string out = header("Mean survey score");
    out += axes(f, years, {1, 2, 3, 4}, "mean response (1-4)");
    std::vector<std::pair<int, double>> pts;
    for (const auto& r : results) pts.emplace_back(r.year, r.mean_score);
    out += polyline(f, pts, "#2ca02c", false, "mean-score");
    out += legend({{"mean score", "#2ca02c", false}});
    out += "</svg>\n";
    return out;
}

std::string domain_influence_svg(const DomainInfluence& influence) {
    std::string out = header("Mean valence by domain");
    const double left = 130;
    const double right = kWidth - 40;
    const double mid = (left + right) / 2;
    const double half = (right - left) / 2;
    const double bottom = kHeight - kBottom;
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"black\"/>\n", mid, kTop,
                       bottom);
    for (double t : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", mid + t / 2 * half,
                           bottom + 18, t);
    }
    const std::size_t n = std::max<std::size_t>(influence.overall.size(), 1);
    const double row = (bottom - kTop) / static_cast<double>(n);
    std::size_t i = 0;
    for (const auto& [domain, v] : influence.overall) {
        const double y = kTop + row * static_cast<double>(i) + row * 0.15;
        const double w = std::fabs(v) / 2 * half;
        const double x = v < 0 ? mid - w : mid;
        out += fmt::format("<rect id=\"bar-{}\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                           escape(domain), x, y, w, row * 0.7, v < 0 ? "#d62728" : "#1f77b4");
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", left - 8,
                           y + row * 0.35 + 4, escape(domain));
        ++i;
    }
    out += "</svg>\n";
    return out;
}

}  // namespace attisim
