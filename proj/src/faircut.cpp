#include "corecut/faircut.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "corecut/errors.hpp"
#include "corecut/marching.hpp"

namespace corecut {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
}

// Derivative-free simplex minimization in R^dim. f granularity is one sample
// count, so termination is on f-spread or simplex size.
std::pair<std::vector<double>, double> nelder_mead(
    int dim, const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x0, double step, int max_iter, double f_tol) {
    const int n = dim;
    std::vector<std::vector<double>> x(n + 1, x0);
    std::vector<double> fx(n + 1);
    for (int i = 0; i < n; ++i) x[i + 1][i] += step;
    for (int i = 0; i <= n; ++i) fx[i] = f(x[i]);

    std::vector<int> idx(n + 1);
    for (int it = 0; it < max_iter; ++it) {
        for (int i = 0; i <= n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
        if (fx[idx[n]] - fx[idx[0]] <= f_tol) break;

        std::vector<double> centroid(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) centroid[j] += x[idx[i]][j] / n;

        const auto blend = [&](double c) {
            std::vector<double> y(n);
            for (int j = 0; j < n; ++j) y[j] = centroid[j] + c * (centroid[j] - x[idx[n]][j]);
            return y;
        };
        std::vector<double> xr = blend(1.0);
        const double fr = f(xr);
        if (fr < fx[idx[0]]) {
            std::vector<double> xe = blend(2.0);
            const double fe = f(xe);
            if (fe < fr) {
                x[idx[n]] = std::move(xe);
                fx[idx[n]] = fe;
            } else {
                x[idx[n]] = std::move(xr);
                fx[idx[n]] = fr;
            }
        } else if (fr < fx[idx[n - 1]]) {
            x[idx[n]] = std::move(xr);
            fx[idx[n]] = fr;
        } else {
            std::vector<double> xc = blend(fr < fx[idx[n]] ? 0.5 : -0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, fx[idx[n]])) {
                x[idx[n]] = std::move(xc);
                fx[idx[n]] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    for (int j = 0; j < n; ++j)
                        x[idx[i]][j] = 0.5 * (x[idx[i]][j] + x[idx[0]][j]);
                    fx[idx[i]] = f(x[idx[i]]);
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i <= n; ++i)
        if (fx[i] < fx[best]) best = i;
    return {x[best], fx[best]};
}

// Minimum-norm point of the convex hull of the rows of `pts` (pairwise
// Frank-Wolfe). Returns {contains_zero, weights}.
std::pair<bool, std::vector<double>> min_norm_point(const std::vector<Vec>& pts, int max_iter,
                                                    double tol) {
    const std::size_t K = pts.size();
    if (K == 0) return {false, {}};
    const std::size_t m = pts[0].size();
    std::vector<double> lam(K, 0.0);
    lam[0] = 1.0;
    Vec p = pts[0];
    for (int it = 0; it < max_iter; ++it) {
        double p2 = dot(p, p);
        if (p2 <= tol * tol) return {true, lam};
        std::size_t s = 0, a = 0;
        double min_dot = 1e300, max_dot = -1e300;
        for (std::size_t i = 0; i < K; ++i) {
            const double d = dot(p, pts[i]);
            if (d < min_dot) {
                min_dot = d;
                s = i;
            }
            if (lam[i] > 0.0 && d > max_dot) {
                max_dot = d;
                a = i;
            }
        }
        if (min_dot > 1e-12) return {false, lam};  // p separates the hull from 0
        Vec d(m);
        for (std::size_t j = 0; j < m; ++j) d[j] = pts[s][j] - pts[a][j];
        const double dd = dot(d, d);
        if (dd < 1e-18) break;
        double gamma = -dot(p, d) / dd;
        gamma = std::clamp(gamma, 0.0, lam[a]);
        if (gamma <= 0.0) break;
        lam[s] += gamma;
        lam[a] -= gamma;
        axpy(p, gamma, d);
    }
    return {std::sqrt(std::max(0.0, dot(p, p))) <= 1e-7, lam};
}

std::vector<Vec> tangent_coords_at(const CurvatureSpace& s, const Point& x0,
                                   const std::vector<TangentVector>& V,
                                   const std::vector<Vec>& basis) {
    std::vector<Vec> coords;
    coords.reserve(V.size());
    for (const TangentVector& v : V) {
        if (distance(s, v.base, x0) > 1e-8)
            throw InvalidInputError("covering: direction not based at the given point");
        Vec c(s.dim);
        for (int j = 0; j < s.dim; ++j) c[j] = metric_dot(s, v.v, basis[j]);
        const double nn = norm(c);
        if (!(nn > 1e-12)) throw DegenerateInputError("covering: zero direction");
        for (double& e : c) e /= nn;
        coords.push_back(std::move(c));
    }
    return coords;
}

}  // namespace

// ---------------------------------------------------------------------------
// CutEvaluator

CutEvaluator::CutEvaluator(const ConvexDomain& domain, std::int64_t n, std::uint64_t seed)
    : domain_(domain), seed_(seed) {
    if (n < 100) throw InvalidInputError("CutEvaluator: needs n >= 100");
    const UniformSampler sampler(domain_);
    cloud_ = sampler.sample_cloud(n, seed);
    probe_ = domain_.probe_center();
}

void CutEvaluator::set_probe(const Point& x) {
    const CurvatureSpace& s = domain_.space();
    probe_ = x;
    basis_ = tangent_basis(s, x);
    const int m = s.dim;
    const std::int64_t n = static_cast<std::int64_t>(cloud_.size());
    coords_.assign(n * m, 0.0);
    angles_.clear();
    at_probe_ = 0;
    if (m == 2) angles_.reserve(n);
    for (std::int64_t i = 0; i < n; ++i) {
        // <q - x, b_j> equals the tangent coordinate of the direction to q
        // (the normal component of q - x is metric-orthogonal to the basis).
        const Vec w = subtracted(cloud_[i].c, x.c);
        double norm2 = 0.0;
        for (int j = 0; j < m; ++j) {
            const double cj = metric_dot(s, w, basis_[j]);
            coords_[i * m + j] = cj;
            norm2 += cj * cj;
        }
        if (norm2 <= 1e-24) {
            ++at_probe_;
            for (int j = 0; j < m; ++j) coords_[i * m + j] = 0.0;
            continue;
        }
        if (m == 2) angles_.push_back(wrap_angle(std::atan2(coords_[i * 2 + 1], coords_[i * 2])));
    }
    if (m == 2) std::sort(angles_.begin(), angles_.end());
}

double CutEvaluator::fraction(const Vec& dir) const {
    const int m = domain_.space().dim;
    const std::int64_t n = static_cast<std::int64_t>(cloud_.size());
    // At-probe samples have zeroed coordinate rows: acc == 0 counts them into
    // every half-space, matching the membership convention.
    std::int64_t hits = 0;
    const double* c = coords_.data();
    if (m == 2) {
        const double d0 = dir[0], d1 = dir[1];
        for (std::int64_t i = 0; i < n; ++i) {
            const double acc = c[2 * i] * d0 + c[2 * i + 1] * d1;
            if (acc >= 0.0) ++hits;
        }
        return static_cast<double>(hits) / n;
    }
    for (std::int64_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) acc += c[i * m + j] * dir[j];
        if (acc >= 0.0) ++hits;
    }
    return static_cast<double>(hits) / n;
}

double CutEvaluator::fraction_angle(double theta) const {
    const std::int64_t n = static_cast<std::int64_t>(cloud_.size());
    const double lo = wrap_angle(theta - 0.25 * kTwoPi);
    const double hi = wrap_angle(theta + 0.25 * kTwoPi);
    const auto cnt_lt = [&](double a) {
        return std::lower_bound(angles_.begin(), angles_.end(), a) - angles_.begin();
    };
    const auto cnt_le = [&](double a) {
        return std::upper_bound(angles_.begin(), angles_.end(), a) - angles_.begin();
    };
    std::int64_t c;
    if (lo <= hi)
        c = cnt_le(hi) - cnt_lt(lo);
    else
        c = (static_cast<std::int64_t>(angles_.size()) - cnt_lt(lo)) + cnt_le(hi);
    return static_cast<double>(c + at_probe_) / n;
}

VolumeEstimate CutEvaluator::estimate(double fraction) const {
    const std::int64_t n = static_cast<std::int64_t>(cloud_.size());
    return make_estimate(static_cast<std::int64_t>(std::llround(fraction * n)), n, seed_);
}

TangentVector CutEvaluator::direction(const Vec& dir) const {
    Vec v(probe_.c.size(), 0.0);
    for (std::size_t j = 0; j < dir.size(); ++j) axpy(v, dir[j], basis_[j]);
    return make_unit_tangent(domain_.space(), probe_, std::move(v));
}

PhiResult CutEvaluator::minimize(int multistarts, std::uint64_t start_seed,
                                 const std::vector<Vec>* warm_dirs,
                                 std::vector<Vec>* found_dirs) const {
    const CurvatureSpace& s = domain_.space();
    const int m = s.dim;
    const std::int64_t n = static_cast<std::int64_t>(cloud_.size());

    Vec best_dir;
    double best_f = 2.0;

    if (m == 2) {
        // global angle scan, then golden-section refinement
        const int grid = 256;
        double best_theta = 0.0;
        for (int i = 0; i < grid; ++i) {
            const double th = kTwoPi * i / grid;
            const double f = fraction_angle(th);
            if (f < best_f) {
                best_f = f;
                best_theta = th;
            }
        }
        double a = best_theta - kTwoPi / grid, b = best_theta + kTwoPi / grid;
        const double gr = 0.6180339887498949;
        double c = b - gr * (b - a), d = a + gr * (b - a);
        double fc = fraction_angle(c), fd = fraction_angle(d);
        while (b - a > 1e-4) {
            if (fc <= fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - gr * (b - a);
                fc = fraction_angle(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + gr * (b - a);
                fd = fraction_angle(d);
            }
            if (fc < best_f) {
                best_f = fc;
                best_theta = c;
            }
            if (fd < best_f) {
                best_f = fd;
                best_theta = d;
            }
        }
        best_dir = {std::cos(best_theta), std::sin(best_theta)};
    } else if (m == 1) {
        for (const double d : {1.0, -1.0}) {
            const double f = fraction({d});
            if (f < best_f) {
                best_f = f;
                best_dir = {d};
            }
        }
    } else {
        // multistart Nelder-Mead in a local orthonormal chart of the sphere
        std::vector<Vec> starts;
        if (warm_dirs) {
            for (const Vec& w : *warm_dirs) {
                Vec c(m, 0.0);
                double nn = 0.0;
                if (static_cast<int>(w.size()) == m) {
                    c = w;
                    nn = norm(c);
                } else {
                    for (int j = 0; j < m; ++j) c[j] = metric_dot(s, w, basis_[j]);
                    nn = norm(c);
                }
                if (nn > 1e-9) {
                    for (double& e : c) e /= nn;
                    starts.push_back(std::move(c));
                }
            }
        }
        RngStream rng(start_seed);
        while (static_cast<int>(starts.size()) < std::max(1, multistarts)) {
            Vec c(m);
            double g2 = 0.0;
            for (int j = 0; j < m; ++j) {
                c[j] = rng.gaussian();
                g2 += c[j] * c[j];
            }
            if (g2 < 1e-12) continue;
            for (double& e : c) e /= std::sqrt(g2);
            starts.push_back(std::move(c));
        }
        const double f_tol = 0.5 / static_cast<double>(n);
        const auto descend = [&](const Vec& v0, double step, int iters) {
            // Nelder-Mead in the orthonormal chart around v0
            std::vector<Vec> w_basis;
            for (int axis = 0; axis < m && static_cast<int>(w_basis.size()) < m - 1; ++axis) {
                Vec e(m, 0.0);
                e[axis] = 1.0;
                axpy(e, -dot(e, v0), v0);
                for (const Vec& wb : w_basis) axpy(e, -dot(e, wb), wb);
                const double nn = norm(e);
                if (nn > 1e-8) {
                    for (double& x : e) x /= nn;
                    w_basis.push_back(std::move(e));
                }
            }
            const auto chart = [&](const std::vector<double>& w) {
                Vec v = v0;
                for (std::size_t j = 0; j < w_basis.size(); ++j) axpy(v, w[j], w_basis[j]);
                const double nn = norm(v);
                for (double& x : v) x /= nn;
                return v;
            };
            const auto obj = [&](const std::vector<double>& w) { return fraction(chart(w)); };
            auto [w_best, f] =
                nelder_mead(m - 1, obj, std::vector<double>(m - 1, 0.0), step, iters, f_tol);
            return std::pair<Vec, double>(chart(w_best), f);
        };
        for (const Vec& v0 : starts) {
            auto [dir, f] = descend(v0, 0.35, 60 + 50 * (m - 1));
            if (found_dirs) found_dirs->push_back(dir);
            if (f < best_f) {
                best_f = f;
                best_dir = dir;
            }
        }
        // polish the incumbent basin with a tighter simplex
        auto [dir, f] = descend(best_dir, 0.08, 60 + 40 * (m - 1));
        if (f < best_f) {
            best_f = f;
            best_dir = dir;
            if (found_dirs) found_dirs->push_back(dir);
        }
    }

    PhiResult out;
    out.value = estimate(best_f);
    out.argmin = direction(best_dir);
    return out;
}

std::vector<TangentVector> CutEvaluator::directions_within(double fmin, double tol, int n_dirs,
                                                           std::uint64_t seed) const {
    const CurvatureSpace& s = domain_.space();
    const int m = s.dim;
    std::vector<TangentVector> out;
    if (m == 2) {
        for (int i = 0; i < n_dirs; ++i) {
            const double th = kTwoPi * i / n_dirs;
            const Vec dir = {std::cos(th), std::sin(th)};
            if (fraction(dir) <= fmin + tol) out.push_back(direction(dir));
        }
        return out;
    }
    RngStream rng(seed);
    for (int i = 0; i < n_dirs; ++i) {
        Vec c(m);
        double g2 = 0.0;
        for (int j = 0; j < m; ++j) {
            c[j] = rng.gaussian();
            g2 += c[j] * c[j];
        }
        if (g2 < 1e-12) continue;
        for (double& e : c) e /= std::sqrt(g2);
        if (fraction(c) <= fmin + tol) out.push_back(direction(c));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Operations

VolumeEstimate cut_fraction(const ConvexDomain& domain, const Point& x, const TangentVector& v,
                            std::int64_t n, std::uint64_t seed) {
    const CurvatureSpace& s = domain.space();
    if (!domain.contains(x)) throw InvalidInputError("cut_fraction: x is outside the domain");
    if (distance(s, v.base, x) > 1e-8)
        throw InvalidInputError("cut_fraction: direction is not based at x");
    if (std::abs(metric_norm(s, v.v) - 1.0) > 1e-6)
        throw InvalidInputError("cut_fraction: direction is not unit length");
    const UniformSampler sampler(domain);
    const std::vector<Point> cloud = sampler.sample_cloud(n, seed);
    const HalfSpace h{v};
    std::int64_t hits = 0;
    for (const Point& q : cloud)
        if (half_space_contains(s, h, q)) ++hits;
    return make_estimate(hits, n, seed);
}

PhiResult phi(const ConvexDomain& domain, const Point& x, std::int64_t n, std::uint64_t seed) {
    if (!domain.contains(x)) throw InvalidInputError("phi: x is outside the domain");
    CutEvaluator eval(domain, n, seed);
    eval.set_probe(x);
    return eval.minimize(4 * (domain.space().dim + 1), derive_seed(seed, "phi-starts"));
}

PhiResult phi(const ConvexDomain& domain, const Point& x, std::int64_t n, std::uint64_t seed,
              double tol_dir, std::vector<TangentVector>& minimizing_directions) {
    if (!domain.contains(x)) throw InvalidInputError("phi: x is outside the domain");
    const int m = domain.space().dim;
    CutEvaluator eval(domain, n, seed);
    eval.set_probe(x);
    const PhiResult r = eval.minimize(4 * (m + 1), derive_seed(seed, "phi-starts"));
    minimizing_directions = eval.directions_within(r.value.fraction, tol_dir, m == 2 ? 512 : 1024,
                                                   derive_seed(seed, "phi-dirscan"));
    return r;
}

double phi_exact_2d(const ConvexDomain& domain, const Point& x) {
    if (!domain.contains(x)) throw InvalidInputError("phi_exact_2d: x is outside the domain");
    const auto at = [&](double th) {
        return exact_cut_fraction_2d(domain, x, {std::cos(th), std::sin(th)});
    };
    double best_f = 2.0, best_theta = 0.0;
    const int grid = 256;
    for (int i = 0; i < grid; ++i) {
        const double th = kTwoPi * i / grid;
        const double f = at(th);
        if (f < best_f) {
            best_f = f;
            best_theta = th;
        }
    }
    double a = best_theta - kTwoPi / grid, b = best_theta + kTwoPi / grid;
    const double gr = 0.6180339887498949;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = at(c), fd = at(d);
    while (b - a > 1e-7) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = at(d);
        }
        best_f = std::min({best_f, fc, fd});
    }
    return best_f;
}

FairCutResult fair_cut_search(const ConvexDomain& domain, const FairCutOptions& opts) {
    const CurvatureSpace& s = domain.space();
    const int m = s.dim;
    const double rb = domain.bounding_radius();
    const std::int64_t n_final = std::max<std::int64_t>(opts.samples, 100);
    const std::int64_t n_search =
        opts.search_samples > 0 ? std::min(opts.search_samples, n_final) : n_final;
    const std::uint64_t cloud_seed = derive_seed(opts.seed, "faircut-cloud");

    CutEvaluator search_eval(domain, n_search, cloud_seed);

    Point x = domain.probe_center();
    if (opts.use_marching) {
        try {
            const int probes = opts.march_probes > 0 ? opts.march_probes : 4 + 2 * m;
            const MarchRegion region =
                march_region(domain, probes, default_march_threshold(m),
                             std::min<std::int64_t>(opts.march_samples, n_search),
                             derive_seed(opts.seed, "march"));
            const RegionSummary summary = region_summary(
                region, domain, std::min<std::int64_t>(20000, n_search),
                derive_seed(opts.seed, "march-summary"));
            if (domain.contains(summary.sample_centroid)) x = summary.sample_centroid;
        } catch (const Error&) {
            // pruning is a warm start only; the pattern search runs regardless
        }
    }

    FairCutResult res;
    const int budget = std::max(1, opts.budget);
    int evals = 0;
    std::vector<Vec> warm;
    const int search_starts = m + 1;
    const auto eval_phi = [&](const Point& px) {
        search_eval.set_probe(px);
        PhiResult r = search_eval.minimize(search_starts, derive_seed(opts.seed, "phi-starts"),
                                           warm.empty() ? nullptr : &warm);
        ++evals;
        return r;
    };

    PhiResult cur = eval_phi(x);
    res.trace.push_back({x.c, cur.value.fraction, 0.1 * rb, true, false});
    warm = {cur.argmin.v};

    double h = 0.1 * rb;
    const double h_min = 1e-3 * rb;
    while (h >= h_min && evals < budget) {
        const std::vector<Vec> basis = tangent_basis(s, x);
        bool moved = false;
        Point best_x;
        PhiResult best;
        for (int i = 0; i < m && evals < budget; ++i) {
            for (const double sign : {1.0, -1.0}) {
                if (evals >= budget) break;
                Vec dir = scaled(basis[i], sign);
                const Point y = exp_map(s, TangentVector{x, std::move(dir)}, h);
                if (!domain.contains(y)) continue;
                PhiResult r = eval_phi(y);
                res.trace.push_back({y.c, r.value.fraction, h, false, false});
                if (!moved || r.value.fraction > best.value.fraction) {
                    best = r;
                    best_x = y;
                    moved = true;
                }
            }
        }
        if (moved && best.value.fraction > cur.value.fraction) {
            x = best_x;
            cur = best;
            warm = {cur.argmin.v};
            res.trace.push_back({x.c, cur.value.fraction, h, true, false});
        } else {
            h *= 0.5;
        }
    }
    res.converged = h < h_min;

    // Reported estimate from the full-size cloud with the full multistart
    // schedule; the search may have used a cheaper cloud.
    CutEvaluator* final_eval = &search_eval;
    std::unique_ptr<CutEvaluator> full;
    if (n_final != n_search) {
        full = std::make_unique<CutEvaluator>(domain, n_final, cloud_seed);
        final_eval = full.get();
    }

    PhiResult fin;
    std::vector<TangentVector> band;
    std::vector<Vec> band_coords;
    const auto measure = [&](const Point& px, int starts) {
        // previous band members make stable warm starts for the minimization
        std::vector<Vec> warm_local = warm;
        const std::size_t stride = band_coords.size() > 12 ? band_coords.size() / 12 : 1;
        for (std::size_t i = 0; i < band_coords.size(); i += stride)
            warm_local.push_back(band_coords[i]);
        final_eval->set_probe(px);
        std::vector<Vec> found;
        fin = final_eval->minimize(starts, derive_seed(opts.seed, "phi-final"), &warm_local,
                                   &found);
        warm = {fin.argmin.v};
        const double tol_dir =
            opts.tol_dir_sigma * std::max(fin.value.std_error, 0.5 / static_cast<double>(n_final));
        band = final_eval->directions_within(fin.value.fraction, tol_dir, m == 2 ? 512 : 1024,
                                             derive_seed(opts.seed, "dirscan"));
        for (const Vec& f : found)
            if (final_eval->fraction(f) <= fin.value.fraction + tol_dir)
                band.push_back(final_eval->direction(f));
        bool has_argmin = false;
        for (const TangentVector& v : band)
            if (metric_dot(s, v.v, fin.argmin.v) > 1.0 - 1e-12) has_argmin = true;
        if (!has_argmin) band.push_back(fin.argmin);
        band_coords.clear();
        for (const TangentVector& v : band) {
            Vec c(m);
            for (int j = 0; j < m; ++j) c[j] = metric_dot(s, v.v, final_eval->basis()[j]);
            band_coords.push_back(std::move(c));
        }
    };

    measure(x, 4 * (m + 1));

    // Any true maximizer balances its minimizing directions (their convex
    // hull holds 0). When the tolerance band fails to span, the band's
    // min-norm point is an ascent direction for phi: nudge the center along
    // it until the band balances or the steps bottom out.
    {
        double step = 4.0 * h_min;
        // drift floor: balancing may cost a little empirical phi, but never
        // more than 1.5 standard errors in total
        const double floor_frac =
            fin.value.fraction - 1.5 * std::max(fin.value.std_error, 1e-12);
        for (int it = 0; it < 16 && step >= 0.25 * h_min; ++it) {
            const auto [covered, weights] = min_norm_point(band_coords, 500, 1e-8);
            if (covered) break;
            Vec p(m, 0.0);
            for (std::size_t i = 0; i < band_coords.size(); ++i)
                axpy(p, weights[i], band_coords[i]);
            const double pn = norm(p);
            if (!(pn > 1e-12)) break;
            for (double& e : p) e /= -pn;  // ascent: away from the clustered band
            const Point y = exp_map(s, final_eval->direction(p), step);
            if (!domain.contains(y)) {
                step *= 0.5;
                continue;
            }
            const Point x_before = x;
            measure(y, 4 * (m + 1));
            if (fin.value.fraction >= floor_frac) {
                x = y;  // keep the better-balanced center
            } else {
                measure(x_before, 4 * (m + 1));
                step *= 0.5;
            }
        }
    }

    res.center = x;
    res.phi = fin.value;
    res.minimizing_directions = band;
    res.covering = covering_check(s, x, res.minimizing_directions);
    if (res.covering) {
        try {
            res.selected = caratheodory_select(s, x, res.minimizing_directions);
        } catch (const Error&) {
            res.selected = {fin.argmin};
        }
    } else {
        res.selected = {fin.argmin};
    }

    const double probe_step = std::min(h_min, 1e-3 * rb);
    const std::vector<Vec> basis = tangent_basis(s, x);
    for (int i = 0; i < m && !res.on_boundary; ++i) {
        for (const double sign : {1.0, -1.0}) {
            Vec dir = scaled(basis[i], sign);
            if (!domain.contains(exp_map(s, TangentVector{x, std::move(dir)}, probe_step))) {
                res.on_boundary = true;
                break;
            }
        }
    }

    const double se_search = std::max(res.phi.std_error, 0.5 / n_search);
    for (TraceEntry& t : res.trace)
        t.near_optimal = t.phi >= res.phi.fraction - se_search;

    const double lo = 1.0 / (m + 1) - 4.0 * res.phi.std_error;
    const double hi_bound = 0.5 + 4.0 * res.phi.std_error;
    res.within_bounds = res.phi.fraction >= lo && res.phi.fraction <= hi_bound;
    return res;
}

bool covering_check(const CurvatureSpace& s, const Point& x0,
                    const std::vector<TangentVector>& V) {
    if (V.empty()) return false;
    const std::vector<Vec> basis = tangent_basis(s, x0);
    const std::vector<Vec> coords = tangent_coords_at(s, x0, V, basis);
    return min_norm_point(coords, 500, 1e-8).first;
}

std::vector<TangentVector> caratheodory_select(const CurvatureSpace& s, const Point& x0,
                                               const std::vector<TangentVector>& V) {
    const int m = s.dim;
    const std::vector<Vec> basis = tangent_basis(s, x0);
    const std::vector<Vec> coords = tangent_coords_at(s, x0, V, basis);
    auto [ok, lam] = min_norm_point(coords, 4000, 1e-9);
    if (!ok)
        throw InvalidInputError("caratheodory_select: 0 is not in the convex hull of the input");

    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < lam.size(); ++i)
        if (lam[i] > 1e-12) support.push_back(i);

    while (static_cast<int>(support.size()) > m + 1) {
        // affine dependence on the support: sum mu_i v_i = 0, sum mu_i = 0
        const int cols = static_cast<int>(support.size());
        std::vector<double> a((m + 1) * cols);
        for (int c = 0; c < cols; ++c) {
            for (int r = 0; r < m; ++r) a[r * cols + c] = coords[support[c]][r];
            a[m * cols + c] = 1.0;
        }
        std::vector<double> mu = null_space_vector(a, m + 1, cols);
        double max_pos = 0.0;
        for (double v : mu) max_pos = std::max(max_pos, v);
        if (max_pos <= 0.0)
            for (double& v : mu) v = -v;
        int drop = -1;
        double t = 1e300;
        for (int c = 0; c < cols; ++c) {
            if (mu[c] > 1e-14) {
                const double ratio = lam[support[c]] / mu[c];
                if (ratio < t) {
                    t = ratio;
                    drop = c;
                }
            }
        }
        if (drop < 0) throw NumericalError("caratheodory_select: degenerate dependence");
        for (int c = 0; c < cols; ++c) lam[support[c]] -= t * mu[c];
        lam[support[drop]] = 0.0;
        std::vector<std::size_t> next;
        double total = 0.0;
        for (std::size_t i : support)
            if (lam[i] > 1e-14) {
                next.push_back(i);
                total += lam[i];
            }
        if (total > 0.0)
            for (std::size_t i : next) lam[i] /= total;
        support = std::move(next);
        if (support.empty()) throw NumericalError("caratheodory_select: lost the combination");
    }

    std::vector<TangentVector> out;
    std::vector<Vec> sel_coords;
    for (std::size_t i : support) {
        out.push_back(V[i]);
        sel_coords.push_back(coords[i]);
    }
    if (!min_norm_point(sel_coords, 2000, 1e-8).first)
        throw NumericalError("caratheodory_select: reduced set lost the covering property");
    return out;
}

HalfSpace nested_half_space(const ConvexDomain& domain, const HalfSpace& h0, const Point& x) {
    const CurvatureSpace& s = domain.space();
    if (std::abs(metric_norm(s, h0.normal()) - 1.0) > 1e-6)
        throw InvalidInputError("nested_half_space: half-space normal is not unit length");
    const double margin = half_space_margin(s, h0, x);
    if (!(margin > 1e-6))
        throw InvalidInputError("nested_half_space: x must lie strictly inside the half-space");

    Point z;  // nearest point of the bounding hyperplane to x
    if (s.euclidean()) {
        Vec c = x.c;
        axpy(c, -margin, h0.normal());
        z = Point{std::move(c)};
    } else {
        // Minkowski projection: the hyperplane is { q : <q, n>_M = 0 }.
        Vec w = x.c;
        axpy(w, -mink_dot(x.c, h0.normal()), h0.normal());
        z = renormalized(s, std::move(w));
    }
    // direction at x continuing the geodesic [z, x] past x
    const TangentVector toward_z = log_dir(s, x, z);
    return make_half_space(s, x, scaled(toward_z.v, -1.0));
}

// ---------------------------------------------------------------------------
// Reports

nlohmann::json faircut_report_json(const FairCutResult& res, const CurvatureSpace& s) {
    nlohmann::json j;
    j["center"] = res.center.c;
    j["center_klein"] = to_klein(s, res.center);
    j["phi"] = {{"fraction", res.phi.fraction},
                {"std_error", res.phi.std_error},
                {"n_samples", res.phi.n_samples},
                {"seed", res.phi.seed}};
    nlohmann::json dirs = nlohmann::json::array();
    for (const TangentVector& v : res.minimizing_directions) dirs.push_back(v.v);
    j["minimizing_directions"] = std::move(dirs);
    nlohmann::json sel = nlohmann::json::array();
    for (const TangentVector& v : res.selected) sel.push_back(v.v);
    j["selected_directions"] = std::move(sel);
    j["converged"] = res.converged;
    j["on_boundary"] = res.on_boundary;
    j["covering"] = res.covering;
    j["within_bounds"] = res.within_bounds;
    nlohmann::json trace = nlohmann::json::array();
    for (const TraceEntry& t : res.trace)
        trace.push_back({{"x", t.x},
                         {"phi", t.phi},
                         {"step", t.step},
                         {"accepted", t.accepted},
                         {"near_optimal", t.near_optimal}});
    j["trace"] = std::move(trace);
    return j;
}

std::string faircut_trace_csv(const FairCutResult& res) {
    std::ostringstream out;
    out.precision(17);
    const std::size_t dim = res.trace.empty() ? 0 : res.trace[0].x.size();
    out << "index,phi,step,accepted,near_optimal";
    for (std::size_t i = 0; i < dim; ++i) out << ",x" << i;
    out << "\n";
    for (std::size_t i = 0; i < res.trace.size(); ++i) {
        const TraceEntry& t = res.trace[i];
        out << i << ',' << t.phi << ',' << t.step << ',' << (t.accepted ? 1 : 0) << ','
            << (t.near_optimal ? 1 : 0);
        for (double c : t.x) out << ',' << c;
        out << "\n";
    }
    return out.str();
}

}  // namespace corecut
