#include "pfara/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include "inferno.hpp"
#include "pfara/error.hpp"
#include "text_util.hpp"

namespace pfara {

EdgeUsage edge_usage(const SimulationResult& result) {
    EdgeUsage usage;
    for (const VehicleStats& v : result.vehicles) {
        const std::set<EdgeId> distinct(v.trace.begin(), v.trace.end());
        for (EdgeId e : distinct) ++usage[e];
    }
    return usage;
}

Layout grid_layout(int rows, int cols, double spacing) {
    Layout layout;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) layout[r * cols + c] = {c * spacing, r * spacing};
    return layout;
}

Layout circle_layout(std::int32_t vertex_count, double radius) {
    Layout layout;
    for (std::int32_t v = 0; v < vertex_count; ++v) {
        const double a = 2.0 * std::numbers::pi * v / std::max(1, vertex_count);
        layout[v] = {radius * std::cos(a), radius * std::sin(a)};
    }
    return layout;
}

Layout load_layout(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open layout " + path.string());
    Layout layout;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = detail::trim(line);
        if (t.empty() || t.front() == '#' || t.starts_with("vertex_id")) continue;
        const auto f = detail::split_csv(t);
        const auto id = f.size() == 3 ? detail::parse_number(f[0]) : std::nullopt;
        const auto x = f.size() == 3 ? detail::parse_number(f[1]) : std::nullopt;
        const auto y = f.size() == 3 ? detail::parse_number(f[2]) : std::nullopt;
        if (!id || !x || !y)
            throw Error(ErrorKind::MalformedRow, path.string() + ":" + std::to_string(line_no) + ": expected vertex_id,x,y");
        layout[static_cast<VertexId>(*id)] = {*x, *y};
    }
    return layout;
}

void save_layout(const Layout& layout, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << "vertex_id,x,y\n";
    for (const auto& [v, p] : layout) out << v << ',' << detail::format_double(p.x) << ',' << detail::format_double(p.y) << '\n';
}

Rgb inferno(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * 255.0;
    const int lo = std::min(254, static_cast<int>(pos));
    const double f = pos - lo;
    auto channel = [&](int c) {
        const double v = detail::kInferno[lo][c] * (1.0 - f) + detail::kInferno[lo + 1][c] * f;
        return static_cast<std::uint8_t>(std::lround(v * 255.0));
    };
    return {channel(0), channel(1), channel(2)};
}

Rgb usage_color(int usage, int max_usage) {
    if (usage <= 0) return {0xd9, 0xd9, 0xd9};
    // Normalize over [1, max]; a single level maps to the top of the ramp.
    const double t = max_usage > 1 ? static_cast<double>(usage - 1) / (max_usage - 1) : 1.0;
    return inferno(t);
}

namespace {

std::string hex(Rgb c) {
    static const char* digits = "0123456789abcdef";
    std::string s = "#";
    for (std::uint8_t v : {c.r, c.g, c.b}) {
        s += digits[v >> 4];
        s += digits[v & 15];
    }
    return s;
}

}  // namespace

std::string heatmap_svg(const RoadNetwork& net, const EdgeUsage& usage, const Layout& layout) {
    for (VertexId v = 0; v < net.vertex_count(); ++v)
        if (!layout.contains(v))
            throw Error(ErrorKind::MissingCoordinates, "layout has no coordinates for vertex " + std::to_string(v));

    double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    bool first = true;
    for (VertexId v = 0; v < net.vertex_count(); ++v) {
        const Point p = layout.at(v);
        if (first) {
            min_x = max_x = p.x;
            min_y = max_y = p.y;
            first = false;
        }
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double span = std::max({max_x - min_x, max_y - min_y, 1e-9});
    const double scale = 800.0 / span, margin = 20.0;
    const double width = (max_x - min_x) * scale + 2 * margin, height = (max_y - min_y) * scale + 2 * margin;
    auto sx = [&](double x) { return (x - min_x) * scale + margin; };
    auto sy = [&](double y) { return (y - min_y) * scale + margin; };

    int max_usage = 0;
    for (const auto& [e, n] : usage) max_usage = std::max(max_usage, n);

    // Unused edges first, then by usage so the busiest edges are drawn on top.
    std::vector<std::pair<int, EdgeId>> order;
    for (const Edge& e : net.edges()) {
        auto it = usage.find(e.id);
        order.emplace_back(it == usage.end() ? 0 : it->second, e.id);
    }
    std::sort(order.begin(), order.end());

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::format_fixed(width, 1) << "\" height=\""
        << detail::format_fixed(height, 1) << "\" viewBox=\"0 0 " << detail::format_fixed(width, 1) << ' '
        << detail::format_fixed(height, 1) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    for (const auto& [n, id] : order) {
        const Edge& e = net.edge(id);
        double x1 = sx(layout.at(e.from).x), y1 = sy(layout.at(e.from).y);
        double x2 = sx(layout.at(e.to).x), y2 = sy(layout.at(e.to).y);
        // Shift each direction to its right so opposite edges stay visible.
        const double dx = x2 - x1, dy = y2 - y1, len = std::hypot(dx, dy);
        if (len > 0) {
            const double off = std::min(3.0, 0.05 * len);
            x1 -= dy / len * off;
            x2 -= dy / len * off;
            y1 += dx / len * off;
            y2 += dx / len * off;
        }
        out << "<line data-edge=\"" << id << "\" data-usage=\"" << n << "\" x1=\"" << detail::format_fixed(x1, 2)
            << "\" y1=\"" << detail::format_fixed(y1, 2) << "\" x2=\"" << detail::format_fixed(x2, 2) << "\" y2=\""
            << detail::format_fixed(y2, 2) << "\" stroke=\"" << hex(usage_color(n, max_usage))
            << "\" stroke-width=\"" << (n > 0 ? "3" : "1") << "\"" << (n > 0 ? "" : " stroke-opacity=\"0.6\"")
            << " stroke-linecap=\"round\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void render_heatmap(const RoadNetwork& net, const EdgeUsage& usage, const Layout& layout,
                    const std::filesystem::path& out) {
    const std::string svg = heatmap_svg(net, usage, layout);
    std::ofstream f(out, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot write " + out.string());
    f << svg;
}

std::string summary_csv(const SimulationResult& result) {
    std::string out = "vehicle,provider,cost,length_m,time_s,remaining_length,remaining_time,remaining_cost\n";
    for (const VehicleStats& v : result.vehicles) {
        const BudgetState& b = v.budget;
        out += std::to_string(v.id) + ',' + std::to_string(v.provider) + ',' + detail::format_double(b.accrued_cost) +
               ',' + detail::format_double(b.travelled_length_m) + ',' + detail::format_double(b.travelled_time_s) +
               ',' + detail::format_double(b.remaining_length_m) + ',' + detail::format_double(b.remaining_time_s) +
               ',' + detail::format_double(b.remaining_cost) + '\n';
    }
    return out;
}

std::string comparison_table(const std::map<Algorithm, SimulationResult>& results) {
    if (results.empty()) throw Error(ErrorKind::MismatchedScenarios, "no results to compare");
    const SimulationResult& ref = results.begin()->second;
    for (const auto& [alg, r] : results) {
        bool same = r.vehicles.size() == ref.vehicles.size();
        for (std::size_t i = 0; same && i < r.vehicles.size(); ++i)
            same = r.vehicles[i].id == ref.vehicles[i].id && r.vehicles[i].provider == ref.vehicles[i].provider;
        if (!same)
            throw Error(ErrorKind::MismatchedScenarios,
                        std::string(to_string(alg)) + " ran a different vehicle set than " +
                            std::string(to_string(results.begin()->first)));
    }

    std::string out = "vehicle,provider";
    for (const auto& [alg, r] : results) {
        const std::string a(to_string(alg));
        out += ',' + a + "_cost," + a + "_time," + a + "_length";
    }
    out += '\n';

    const std::size_t cols = results.size() * 3;
    std::map<ProviderId, std::vector<double>> per_provider;
    std::vector<double> grand(cols, 0.0);
    for (std::size_t i = 0; i < ref.vehicles.size(); ++i) {
        const ProviderId p = ref.vehicles[i].provider;
        auto& totals = per_provider.try_emplace(p, std::vector<double>(cols, 0.0)).first->second;
        out += std::to_string(ref.vehicles[i].id) + ',' + std::to_string(p);
        std::size_t c = 0;
        for (const auto& [alg, r] : results) {
            const BudgetState& b = r.vehicles[i].budget;
            for (double v : {b.accrued_cost, b.travelled_time_s, b.travelled_length_m}) {
                out += ',' + detail::format_double(v);
                totals[c] += v;
                grand[c] += v;
                ++c;
            }
        }
        out += '\n';
    }
    for (const auto& [p, totals] : per_provider) {
        out += "total," + std::to_string(p);
        for (double v : totals) out += ',' + detail::format_double(v);
        out += '\n';
    }
    out += "total,all";
    for (double v : grand) out += ',' + detail::format_double(v);
    out += '\n';
    return out;
}

}  // namespace pfara
