#include "voltspec/winding.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

namespace vs {

namespace {

using cplx = std::complex<double>;

struct Walker {
    const std::function<cplx(cplx)>& f;
    const WindingOptions& opt;
    double total = 0.0;
    double min_abs = HUGE_VAL;
    int depth_seen = 0;
    std::size_t samples = 0;

    cplx probe(cplx z) {
        if (++samples > opt.max_samples)
            throw resolution_error("winding: sample budget exceeded");
        cplx v = f(z);
        double m = std::abs(v);
        if (opt.collect)
            opt.collect->push_back(
                {z.real(), z.imag(), v.real(), v.imag(), std::arg(v)});
        if (!(m > 0.0) || !std::isfinite(m))
            throw contour_error("winding: function vanished or blew up on the contour");
        if (m < opt.min_abs_fail)
            throw contour_error("winding: |f| fell below the contour threshold at z = (" +
                                std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")");
        min_abs = std::min(min_abs, m);
        return v;
    }

    void segment(cplx za, cplx va, cplx zb, cplx vb, int depth) {
        double step = std::arg(vb / va);
        if (std::fabs(step) < M_PI / 2.0) {
            total += step;
            depth_seen = std::max(depth_seen, depth);
            return;
        }
        if (depth >= opt.max_depth)
            throw resolution_error("winding: refinement cap exceeded near z = (" +
                                   std::to_string(za.real()) + ", " + std::to_string(za.imag()) +
                                   ")");
        cplx zm = 0.5 * (za + zb);
        cplx vm = probe(zm);
        segment(za, va, zm, vm, depth + 1);
        segment(zm, vm, zb, vb, depth + 1);
    }
};

} // namespace

std::string contour_samples_csv(const std::vector<ContourSample>& samples) {
    std::string out = "x,y,re_beta,im_beta,phase\n";
    char buf[160];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g\n", s.x, s.y, s.re,
                      s.im, s.phase);
        out += buf;
    }
    return out;
}

WindingResult winding_number(const std::function<cplx(cplx)>& f, const Rect& rect,
                             const WindingOptions& opt) {
    if (!(rect.x0 < rect.x1) || !(rect.y0 < rect.y1))
        throw parameter_error("winding: degenerate rectangle");

    const cplx corners[5] = {{rect.x0, rect.y0},
                             {rect.x1, rect.y0},
                             {rect.x1, rect.y1},
                             {rect.x0, rect.y1},
                             {rect.x0, rect.y0}};

    Walker walk{f, opt};
    for (int e = 0; e < 4; ++e) {
        const int n = std::max(2, opt.initial_per_edge);
        std::vector<cplx> zs(n + 1), vs(n + 1);
        for (int i = 0; i <= n; ++i) {
            double s = double(i) / n;
            zs[i] = corners[e] + s * (corners[e + 1] - corners[e]);
            vs[i] = walk.probe(zs[i]);
        }
        for (int i = 0; i < n; ++i) walk.segment(zs[i], vs[i], zs[i + 1], vs[i + 1], 0);
    }

    WindingResult r;
    double turns = walk.total / (2.0 * M_PI);
    r.winding = std::lround(turns);
    r.residual = std::fabs(turns - double(r.winding));
    if (r.residual > 0.25)
        throw resolution_error("winding: phase total is not integral (residual " +
                               std::to_string(r.residual) + ")");
    r.min_abs = walk.min_abs;
    r.refinement_depth = walk.depth_seen;
    r.samples = walk.samples;
    return r;
}

} // namespace vs
