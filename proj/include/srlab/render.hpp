// render.hpp: Built-in rasterization of sweep tables: heatmaps, curves and Wigner density plots

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "srlab/png.hpp"
#include "srlab/sweep.hpp"

namespace srlab {

namespace colormap {

inline Rgb lerp(Rgb a, Rgb b, double t) {
    auto m = [t](std::uint8_t x, std::uint8_t y) {
        return static_cast<std::uint8_t>(std::lround(x + (static_cast<double>(y) - x) * t));
    };
    return {m(a.r, b.r), m(a.g, b.g), m(a.b, b.b)};
}

inline Rgb ramp(const std::vector<Rgb>& stops, double t) {
    if (!std::isfinite(t)) return {255, 255, 255};
    t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(t), stops.size() - 2);
    return lerp(stops[i], stops[i + 1], t - i);
}

// t in [0, 1]
inline Rgb sequential(double t) {
    static const std::vector<Rgb> s{{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    return ramp(s, t);
}

// t in [-1, 1], white at 0
inline Rgb diverging(double t) {
    static const std::vector<Rgb> s{{5, 48, 97}, {67, 147, 195}, {247, 247, 247}, {214, 96, 77}, {103, 0, 31}};
    return ramp(s, 0.5 * (t + 1.0));
}

inline Rgb greens(double t) { return ramp({{237, 248, 233}, {116, 196, 118}, {0, 90, 50}}, t); }
inline Rgb reds(double t) { return ramp({{254, 229, 217}, {251, 106, 74}, {153, 0, 13}}, t); }

} // namespace colormap

namespace detail {

// 3x5 glyphs, one row per 3 bits (MSB = left)
inline const std::array<std::uint8_t, 5>* glyph(char c) {
    static const std::array<std::array<std::uint8_t, 5>, 14> g{{
        {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
        {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7},
        {0, 0, 0, 0, 2}, {0, 0, 7, 0, 0}, {7, 4, 6, 4, 7}, {0, 2, 7, 2, 0},
    }};
    if (c >= '0' && c <= '9') return &g[static_cast<std::size_t>(c - '0')];
    if (c == '.') return &g[10];
    if (c == '-') return &g[11];
    if (c == 'e') return &g[12];
    if (c == '+') return &g[13];
    return nullptr;
}

inline void draw_text(Image& img, int x, int y, const std::string& s, Rgb c = {0, 0, 0}, int scale = 2) {
    for (char ch : s) {
        if (const auto* gl = glyph(ch))
            for (int r = 0; r < 5; ++r)
                for (int b = 0; b < 3; ++b)
                    if ((*gl)[r] & (4 >> b)) img.fill_rect(x + b * scale, y + r * scale, x + (b + 1) * scale, y + (r + 1) * scale, c);
        x += 4 * scale;
    }
}

inline int text_width(const std::string& s, int scale = 2) { return static_cast<int>(s.size()) * 4 * scale; }

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

inline void draw_line(Image& img, double x0, double y0, double x1, double y1, Rgb c, int thick = 1) {
    const int steps = static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)))) + 1;
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        const int x = static_cast<int>(std::lround(x0 + (x1 - x0) * t));
        const int y = static_cast<int>(std::lround(y0 + (y1 - y0) * t));
        img.fill_rect(x - thick / 2, y - thick / 2, x - thick / 2 + thick, y - thick / 2 + thick, c);
    }
}

struct Frame {
    int left{70}, top{20}, width{400}, height{300};
    double xmin{0}, xmax{1}, ymin{0}, ymax{1};

    double px(double x) const { return left + (x - xmin) / (xmax - xmin) * (width - 1); }
    double py(double y) const { return top + (1.0 - (y - ymin) / (ymax - ymin)) * (height - 1); }
};

inline void draw_axes(Image& img, const Frame& f) {
    const Rgb k{0, 0, 0};
    draw_line(img, f.left - 1, f.top - 1, f.left + f.width, f.top - 1, k);
    draw_line(img, f.left - 1, f.top + f.height, f.left + f.width, f.top + f.height, k);
    draw_line(img, f.left - 1, f.top - 1, f.left - 1, f.top + f.height, k);
    draw_line(img, f.left + f.width, f.top - 1, f.left + f.width, f.top + f.height, k);
    for (int i = 0; i <= 4; ++i) {
        const double xv = f.xmin + (f.xmax - f.xmin) * i / 4.0, yv = f.ymin + (f.ymax - f.ymin) * i / 4.0;
        const int x = static_cast<int>(std::lround(f.px(xv))), y = static_cast<int>(std::lround(f.py(yv)));
        draw_line(img, x, f.top + f.height, x, f.top + f.height + 5, k);
        draw_line(img, f.left - 6, y, f.left - 1, y, k);
        const auto xl = tick_label(xv), yl = tick_label(yv);
        draw_text(img, x - text_width(xl) / 2, f.top + f.height + 9, xl);
        draw_text(img, f.left - 10 - text_width(yl), y - 5, yl);
    }
}

inline void draw_colorbar(Image& img, const Frame& f, const std::function<Rgb(double)>& cmap, double lo, double hi) {
    const int x0 = f.left + f.width + 15, x1 = x0 + 15;
    for (int y = 0; y < f.height; ++y) {
        const double t = 1.0 - static_cast<double>(y) / (f.height - 1);
        img.fill_rect(x0, f.top + y, x1, f.top + y + 1, cmap(t));
    }
    draw_text(img, x1 + 4, f.top - 2, tick_label(hi));
    draw_text(img, x1 + 4, f.top + f.height - 10, tick_label(lo));
}

// Cell-centred heatmap of values(ix, iy); NaN renders white.
inline Image heatmap(const std::vector<double>& xs, const std::vector<double>& ys,
                     const std::function<double(std::size_t, std::size_t)>& value,
                     const std::function<Rgb(std::size_t, std::size_t, double)>& color, double bar_lo, double bar_hi,
                     const std::function<Rgb(double)>& bar) {
    Frame f;
    f.xmin = xs.front();
    f.xmax = xs.back();
    f.ymin = ys.front();
    f.ymax = ys.back();
    Image img(f.left + f.width + 90, f.top + f.height + 40);
    const double nx = static_cast<double>(xs.size()), ny = static_cast<double>(ys.size());
    for (int py = 0; py < f.height; ++py)
        for (int px = 0; px < f.width; ++px) {
            const auto ix = std::min(static_cast<std::size_t>((px + 0.5) / f.width * nx), xs.size() - 1);
            const auto iy = std::min(static_cast<std::size_t>((1.0 - (py + 0.5) / f.height) * ny), ys.size() - 1);
            img.set(f.left + px, f.top + py, color(ix, iy, value(ix, iy)));
        }
    draw_axes(img, f);
    if (bar) draw_colorbar(img, f, bar, bar_lo, bar_hi);
    return img;
}

struct Series {
    std::vector<double> x, y;
    Rgb color{0, 0, 0};
    bool dashed{false};
};

inline Image curves(const std::vector<Series>& series) {
    Frame f;
    f.width = 480;
    double xlo = 1e300, xhi = -1e300, ylo = 0.0, yhi = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            ylo = std::min(ylo, s.y[i]);
            yhi = std::max(yhi, s.y[i]);
        }
    if (!(xhi > xlo)) {
        xlo = 0;
        xhi = 1;
    }
    if (!(yhi > ylo)) yhi = ylo + 1.0;
    f.xmin = xlo;
    f.xmax = xhi;
    f.ymin = ylo;
    f.ymax = yhi + 0.05 * (yhi - ylo);
    Image img(f.left + f.width + 20, f.top + f.height + 40);
    for (const auto& s : series) {
        double run = 0.0;
        for (std::size_t i = 1; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i - 1]) || !std::isfinite(s.y[i])) continue;
            const double x0 = f.px(s.x[i - 1]), y0 = f.py(s.y[i - 1]), x1 = f.px(s.x[i]), y1 = f.py(s.y[i]);
            const double len = std::hypot(x1 - x0, y1 - y0);
            if (!s.dashed) {
                draw_line(img, x0, y0, x1, y1, s.color, 2);
            } else {
                // 8 px on, 6 px off
                const int n = std::max(1, static_cast<int>(std::ceil(len)));
                for (int k = 0; k < n; ++k) {
                    if (std::fmod(run + k, 14.0) < 8.0) {
                        const double t0 = static_cast<double>(k) / n, t1 = static_cast<double>(k + 1) / n;
                        draw_line(img, x0 + (x1 - x0) * t0, y0 + (y1 - y0) * t0, x0 + (x1 - x0) * t1,
                                  y0 + (y1 - y0) * t1, s.color, 2);
                    }
                }
            }
            run += len;
        }
    }
    draw_axes(img, f);
    return img;
}

inline Rgb palette(std::size_t i) {
    static const std::vector<Rgb> p{{214, 39, 40}, {0, 0, 0}, {31, 119, 180}, {44, 160, 44}, {148, 103, 189},
                                    {255, 127, 14}};
    return p[i % p.size()];
}

inline double finite_max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        if (std::isfinite(x)) m = std::max(m, std::abs(x));
    return m;
}

} // namespace detail

// Density plot of W on its grid, diverging colours symmetric about W = 0.
inline Image render_wigner(const quantum::WignerGrid& g) {
    const double m = std::max(std::abs(g.w.maxCoeff()), std::abs(g.w.minCoeff()));
    const double scale = m > 0 ? m : 1.0;
    return detail::heatmap(
        g.xs, g.ps, [&](std::size_t i, std::size_t j) { return g.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); },
        [&](std::size_t, std::size_t, double v) { return colormap::diverging(v / scale); }, -scale, scale,
        [](double t) { return colormap::diverging(2 * t - 1); });
}

struct RenderedImage {
    std::string file;
    Image image;
};

namespace detail {

inline void check_schema(const SweepResult& r) {
    if (r.table.columns != schema(r.config))
        throw SchemaMismatch("table columns do not match the " + to_string(r.config.mode) + " schema");
    for (const auto& row : r.table.rows)
        if (row.size() != r.table.columns.size()) throw SchemaMismatch("row width differs from header");
    if (r.table.rows.size() != r.config.grid_size()) throw SchemaMismatch("row count differs from grid size");
}

// values[ix * ny + iy] for a two-axis table
inline std::vector<double> grid_column(const SweepResult& r, const std::function<double(std::size_t)>& f) {
    std::vector<double> v(r.table.rows.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(i);
    return v;
}

} // namespace detail

// Images for a sweep result, named after the config. Throws SchemaMismatch for malformed tables.
inline std::vector<RenderedImage> render(const SweepResult& r) {
    detail::check_schema(r);
    const auto& cfg = r.config;
    const auto& t = r.table;
    std::vector<RenderedImage> out;
    auto col = [&](const std::string& name) { return t.column(name); };
    auto num = [&](std::size_t row, const std::string& name) { return t.number(row, col(name)); };

    if (cfg.mode == Mode::Wigner) {
        for (std::size_t i = 0; i < r.wigner.size(); ++i)
            if (r.wigner[i]) {
                auto f = wigner_grid_file(cfg, i);
                f.replace(f.size() - 4, 4, ".png");
                out.push_back({f, render_wigner(*r.wigner[i])});
            }
        return out;
    }

    if (cfg.axes.size() == 2 && is_meanfield_mode(cfg.mode)) {
        const auto xs = cfg.axes[0].values(), ys = cfg.axes[1].values();
        const std::size_t ny = ys.size();
        auto at = [ny](const std::vector<double>& v) {
            return [&v, ny](std::size_t ix, std::size_t iy) { return v[ix * ny + iy]; };
        };
        if (cfg.mode == Mode::MeanfieldMap) {
            for (const char* part : {"alpha_re", "alpha_im"}) {
                const auto v = detail::grid_column(r, [&](std::size_t i) {
                    return num(i, "sp_plus_pos_stable") > 0 ? num(i, std::string("sp_plus_pos_") + part) : kNaN;
                });
                const double m = std::max(detail::finite_max_abs(v), 1e-300);
                out.push_back({cfg.name + "_" + part + ".png",
                               detail::heatmap(xs, ys, at(v),
                                               [m](std::size_t, std::size_t, double x) {
                                                   return std::isfinite(x) ? colormap::diverging(x / m) : Rgb{};
                                               },
                                               -m, m, [](double tt) { return colormap::diverging(2 * tt - 1); })});
            }
        } else if (cfg.mode == Mode::FluctuationMap) {
            auto logf = [&](std::size_t i, const char* b) {
                return num(i, std::string(b) + "_stable") > 0 ? std::log1p(num(i, std::string(b) + "_fluct")) : kNaN;
            };
            const auto np = detail::grid_column(r, [&](std::size_t i) { return logf(i, "np_down"); });
            const auto sp = detail::grid_column(r, [&](std::size_t i) { return logf(i, "sp_plus_pos"); });
            const double m = std::max({detail::finite_max_abs(np), detail::finite_max_abs(sp), 1e-300});
            auto color = [&](std::size_t ix, std::size_t iy, double) {
                const double a = np[ix * ny + iy], b = sp[ix * ny + iy];
                const bool ha = std::isfinite(a), hb = std::isfinite(b);
                if (ha && hb) return colormap::lerp(colormap::greens(a / m), colormap::reds(b / m), 0.5);
                if (ha) return colormap::greens(a / m);
                if (hb) return colormap::reds(b / m);
                return Rgb{};
            };
            out.push_back({cfg.name + ".png", detail::heatmap(xs, ys, at(np), color, 0.0, m, colormap::reds)});
            const auto cnt = detail::grid_column(r, [&](std::size_t i) { return num(i, "stable_count"); });
            out.push_back({cfg.name + "_regimes.png",
                           detail::heatmap(xs, ys, at(cnt),
                                           [](std::size_t, std::size_t, double c) {
                                               return c <= 0 ? Rgb{} : colormap::sequential((c - 1) / 2.0);
                                           },
                                           1.0, 3.0, colormap::sequential)});
        } else if (cfg.mode == Mode::StabilityMap) {
            for (auto [suffix, branch] : {std::pair{"_np", "np_down"}, std::pair{"_sp", "sp_plus_pos"}}) {
                const auto v = detail::grid_column(r, [&](std::size_t i) {
                    return num(i, std::string(branch) + "_stable") > 0 ? num(i, std::string(branch) + "_max_re") : kNaN;
                });
                double lo = 0.0;
                for (double x : v)
                    if (std::isfinite(x)) lo = std::min(lo, x);
                const double scale = lo < 0 ? -lo : 1.0;
                out.push_back({cfg.name + suffix + ".png",
                               detail::heatmap(xs, ys, at(v),
                                               [scale](std::size_t, std::size_t, double x) {
                                                   return std::isfinite(x) ? colormap::sequential(-x / scale) : Rgb{};
                                               },
                                               0.0, scale, colormap::sequential)});
            }
        }
        return out;
    }

    const auto xs = cfg.axes[0].values();
    std::vector<detail::Series> series;
    if (cfg.mode == Mode::SwitchingCurve) {
        detail::Series re{xs, {}, {214, 39, 40}, false}, im{xs, {}, {31, 119, 180}, true};
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const bool sp = num(i, "sp_plus_pos_stable") > 0;
            re.y.push_back(sp ? std::abs(num(i, "sp_plus_pos_alpha_re")) : 0.0);
            im.y.push_back(sp ? std::abs(num(i, "sp_plus_pos_alpha_im")) : 0.0);
        }
        series = {re, im};
    } else if (cfg.mode == Mode::FluctuationMap) {
        detail::Series np{xs, {}, {44, 160, 44}, false}, sp{xs, {}, {214, 39, 40}, false};
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            np.y.push_back(num(i, "np_down_stable") > 0 ? std::log1p(num(i, "np_down_fluct")) : kNaN);
            sp.y.push_back(num(i, "sp_plus_pos_stable") > 0 ? std::log1p(num(i, "sp_plus_pos_fluct")) : kNaN);
        }
        series = {np, sp};
    } else {
        const std::size_t nfam = cfg.axes.size() == 2 ? static_cast<std::size_t>(cfg.axes[1].points) : 1;
        for (std::size_t fam = 0; fam < nfam; ++fam) {
            detail::Series s{xs, {}, detail::palette(fam), false};
            for (std::size_t ix = 0; ix < xs.size(); ++ix) s.y.push_back(num(ix * nfam + fam, "mean_photon"));
            series.push_back(std::move(s));
        }
    }
    out.push_back({cfg.name + ".png", detail::curves(series)});
    return out;
}

inline std::vector<std::string> write_images(const std::vector<RenderedImage>& imgs, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> files;
    for (const auto& im : imgs) {
        write_png(dir / im.file, im.image);
        files.push_back(im.file);
    }
    return files;
}

} // namespace srlab
