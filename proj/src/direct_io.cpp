#include "swsynth/direct.hpp"

#include <cstdio>
#include <map>
#include <sstream>

namespace swsynth {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error("subspace: " + what); }

std::vector<std::pair<CellIndex, CellIndex>> runs_of(const GriddySet& s) {
    std::vector<std::pair<CellIndex, CellIndex>> runs;
    s.for_each([&](CellIndex c) {
        if (!runs.empty() && runs.back().first + runs.back().second == c) {
            ++runs.back().second;
        } else {
            runs.emplace_back(c, 1);
        }
    });
    return runs;
}

}  // namespace

std::string format_subspace(const ControllableSubspace& cs) {
    const auto& grid = *cs.grid();
    std::ostringstream out;
    out << "swsynth-subspace 1\n";
    out << "dimension " << grid.dimension() << '\n';
    out << "lower";
    for (double v : grid.box().lower()) out << ' ' << fmt(v);
    out << "\nupper";
    for (double v : grid.box().upper()) out << ' ' << fmt(v);
    out << "\ncells";
    for (auto c : grid.counts()) out << ' ' << c;
    out << "\nmodes " << cs.mode_ids.size() << '\n';
    out << "iterations " << cs.iterations << '\n';
    out << "converged " << (cs.converged ? 1 : 0) << '\n';
    for (std::size_t i = 0; i < cs.mode_ids.size(); ++i) {
        const auto runs = runs_of(cs.control[i]);
        out << "control " << cs.mode_ids[i] << " runs " << runs.size() << '\n';
        for (std::size_t r = 0; r < runs.size(); ++r) {
            out << runs[r].first << ' ' << runs[r].second << ((r % 8 == 7 || r + 1 == runs.size()) ? '\n' : ' ');
        }
    }
    out << "end\n";
    return out.str();
}

ControllableSubspace parse_subspace(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    auto expect = [&](const char* key) {
        if (!(in >> word) || word != key) fail(std::string("expected '") + key + "'");
    };
    auto read_int = [&](const char* what) {
        long long v;
        if (!(in >> v)) fail(std::string("bad ") + what);
        return v;
    };
    auto read_real = [&](const char* what) {
        if (!(in >> word)) fail(std::string("missing ") + what);
        try {
            return parse_real(word);
        } catch (const std::invalid_argument&) {
            fail(std::string("bad ") + what);
        }
    };

    expect("swsynth-subspace");
    if (read_int("version") != 1) fail("unsupported version");
    expect("dimension");
    const auto n = read_int("dimension");
    if (n < 1 || n > 16) fail("bad dimension");
    Vector lower(n), upper(n);
    expect("lower");
    for (Eigen::Index i = 0; i < n; ++i) lower[i] = read_real("lower bound");
    expect("upper");
    for (Eigen::Index i = 0; i < n; ++i) upper[i] = read_real("upper bound");
    expect("cells");
    std::vector<std::int64_t> counts;
    for (Eigen::Index i = 0; i < n; ++i) counts.push_back(read_int("cell count"));
    expect("modes");
    const auto m = read_int("mode count");
    if (m < 1) fail("bad mode count");
    expect("iterations");
    const auto iterations = read_int("iteration count");
    expect("converged");
    const auto converged = read_int("converged flag");

    GridHandle grid;
    try {
        grid = make_grid(CellGrid(Box(lower, upper), counts));
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    ControllableSubspace cs{{}, {}, GriddySet::empty(grid), static_cast<std::size_t>(std::max(0LL, iterations)), converged != 0};
    for (long long i = 0; i < m; ++i) {
        expect("control");
        const auto id = read_int("mode id");
        expect("runs");
        const auto count = read_int("run count");
        if (count < 0) fail("bad run count");
        std::vector<CellIndex> cells;
        for (long long r = 0; r < count; ++r) {
            const auto start = read_int("run start");
            const auto len = read_int("run length");
            if (start < 0 || len < 1 || static_cast<CellIndex>(start) + static_cast<CellIndex>(len) > grid->size()) {
                fail("run outside the grid");
            }
            for (long long k = 0; k < len; ++k) cells.push_back(static_cast<CellIndex>(start + k));
        }
        cs.mode_ids.push_back(static_cast<int>(id));
        cs.control.push_back(GriddySet::from_indices(grid, std::move(cells)));
    }
    expect("end");
    for (const auto& c : cs.control) cs.v_prime = cs.v_prime.unite(c);
    return cs;
}

namespace {

constexpr const char* kPalette[] = {"#4c78a8", "#72b7b2", "#54a24b", "#eeca3b",
                                    "#b279a2", "#9d755d", "#bab0ac", "#ff9da6"};
constexpr const char* kUncontrollable = "#e45756";

struct Panel {
    double x, y, w, h;
};

void axis_labels(std::ostringstream& svg, const Panel& p, const Box& v, std::size_t ax, std::size_t ay) {
    svg << "<text x=\"" << p.x << "\" y=\"" << p.y + p.h + 14 << "\" font-size=\"10\">x" << ax + 1 << ": "
        << fmt_short(v.lower()[static_cast<Eigen::Index>(ax)]) << " .. " << fmt_short(v.upper()[static_cast<Eigen::Index>(ax)])
        << "</text>\n";
    svg << "<text x=\"" << p.x << "\" y=\"" << p.y - 4 << "\" font-size=\"10\">x" << ay + 1 << ": "
        << fmt_short(v.lower()[static_cast<Eigen::Index>(ay)]) << " .. " << fmt_short(v.upper()[static_cast<Eigen::Index>(ay)])
        << "</text>\n";
    svg << "<rect x=\"" << p.x << "\" y=\"" << p.y << "\" width=\"" << p.w << "\" height=\"" << p.h
        << "\" fill=\"none\" stroke=\"black\"/>\n";
}

}  // namespace

std::string render_regions_svg(const ControllableSubspace& cs, const std::vector<Vector>& trajectory) {
    const auto& grid = *cs.grid();
    const auto n = static_cast<std::size_t>(grid.dimension());
    const Box& v = grid.box();
    std::ostringstream svg;

    if (n == 1) {
        // A single strip; rare but keeps the renderer total.
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"80\">\n";
        const Panel p{20, 20, 600, 30};
        const double cw = p.w / static_cast<double>(grid.counts()[0]);
        for (CellIndex c = 0; c < grid.size(); ++c) {
            const char* color = kUncontrollable;
            for (std::size_t i = 0; i < cs.control.size(); ++i) {
                if (cs.control[i].contains(c)) {
                    color = kPalette[i % 8];
                    break;
                }
            }
            svg << "<rect x=\"" << p.x + cw * static_cast<double>(c) << "\" y=\"" << p.y << "\" width=\"" << cw
                << "\" height=\"" << p.h << "\" fill=\"" << color << "\"/>\n";
        }
        svg << "</svg>\n";
        return svg.str();
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
    }
    const std::size_t columns = std::min<std::size_t>(pairs.size(), 3);
    const std::size_t rows = (pairs.size() + columns - 1) / columns;
    const double size = n == 2 ? 600.0 : 300.0;
    const double width = static_cast<double>(columns) * (size + 60) + 20;
    const double height = static_cast<double>(rows) * (size + 60) + 60;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" shape-rendering=\"crispEdges\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        const auto [ax, ay] = pairs[pi];
        const Panel p{40 + static_cast<double>(pi % columns) * (size + 60), 30 + static_cast<double>(pi / columns) * (size + 60),
                      size, size};
        const auto nx = grid.counts()[ax];
        const auto ny = grid.counts()[ay];
        const double cw = p.w / static_cast<double>(nx);
        const double ch = p.h / static_cast<double>(ny);

        // Per projected cell: smallest controlling mode index (n = 2), or the
        // share of V' cells in the fibre (n > 2).
        std::vector<int> best(static_cast<std::size_t>(nx * ny), -1);
        std::vector<std::uint64_t> inside(static_cast<std::size_t>(nx * ny), 0);
        for (std::size_t i = cs.control.size(); i-- > 0;) {
            cs.control[i].for_each([&](CellIndex c) {
                const auto k = grid.coord(c);
                best[static_cast<std::size_t>(k[ax] * ny + k[ay])] = static_cast<int>(i);
            });
        }
        cs.v_prime.for_each([&](CellIndex c) {
            const auto k = grid.coord(c);
            ++inside[static_cast<std::size_t>(k[ax] * ny + k[ay])];
        });
        const double fibre = static_cast<double>(grid.size()) / static_cast<double>(nx * ny);

        for (std::int64_t j = 0; j < ny; ++j) {
            std::int64_t i = 0;
            while (i < nx) {
                const auto key = static_cast<std::size_t>(i * ny + j);
                std::string color;
                if (n == 2) {
                    color = best[key] < 0 ? kUncontrollable : kPalette[best[key] % 8];
                } else {
                    const double share = static_cast<double>(inside[key]) / fibre;
                    if (share <= 0.0) {
                        color = kUncontrollable;
                    } else {
                        const int shade = static_cast<int>(235 - 160 * share);
                        char buf[16];
                        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", shade, shade, 255);
                        color = buf;
                    }
                }
                std::int64_t run = 1;
                while (i + run < nx) {
                    const auto k2 = static_cast<std::size_t>((i + run) * ny + j);
                    std::string c2;
                    if (n == 2) {
                        c2 = best[k2] < 0 ? kUncontrollable : kPalette[best[k2] % 8];
                    } else {
                        if (inside[k2] != inside[key]) break;
                        c2 = color;
                    }
                    if (c2 != color) break;
                    ++run;
                }
                svg << "<rect x=\"" << p.x + cw * static_cast<double>(i) << "\" y=\""
                    << p.y + p.h - ch * static_cast<double>(j + 1) << "\" width=\"" << cw * static_cast<double>(run)
                    << "\" height=\"" << ch << "\" fill=\"" << color << "\"/>\n";
                i += run;
            }
        }
        axis_labels(svg, p, v, ax, ay);

        if (trajectory.size() > 1) {
            svg << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"0.7\" points=\"";
            const auto ex = static_cast<Eigen::Index>(ax);
            const auto ey = static_cast<Eigen::Index>(ay);
            for (const auto& x : trajectory) {
                const double px = p.x + (x[ex] - v.lower()[ex]) / (v.upper()[ex] - v.lower()[ex]) * p.w;
                const double py = p.y + p.h - (x[ey] - v.lower()[ey]) / (v.upper()[ey] - v.lower()[ey]) * p.h;
                svg << fmt_short(px) << ',' << fmt_short(py) << ' ';
            }
            svg << "\"/>\n";
        }
    }

    // Legend.
    const double ly = height - 20;
    double lx = 40;
    auto swatch = [&](const std::string& color, const std::string& label, double advance) {
        svg << "<rect x=\"" << lx << "\" y=\"" << ly - 10 << "\" width=\"10\" height=\"10\" fill=\"" << color
            << "\"/><text x=\"" << lx + 14 << "\" y=\"" << ly << "\" font-size=\"11\">" << label << "</text>\n";
        lx += advance;
    };
    if (n > 2) {
        swatch("#4b4bff", "all of fibre in V'", 130);
        swatch("#c1c1ff", "part of fibre in V'", 130);
        swatch(kUncontrollable, "none in V'", 90);
    } else {
        for (std::size_t i = 0; i < cs.mode_ids.size(); ++i) swatch(kPalette[i % 8], "mode " + std::to_string(cs.mode_ids[i]), 70);
        swatch(kUncontrollable, "uncontrollable", 100);
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace swsynth
