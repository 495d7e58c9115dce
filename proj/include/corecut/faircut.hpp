#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "corecut/domain.hpp"

namespace corecut {

struct PhiResult {
    VolumeEstimate value;
    TangentVector argmin;
};

struct TraceEntry {
    Vec x;            // probe coordinates
    double phi = 0.0;
    double step = 0.0;
    bool accepted = false;      // probe became the new incumbent
    bool near_optimal = false;  // within one std error of the final maximum
};

struct FairCutOptions {
    std::int64_t samples = kDefaultSamples;  // sample count for the reported estimate
    std::int64_t search_samples = 0;         // cheaper cloud for the search loop; 0 = samples
    std::uint64_t seed = 0;
    int budget = 400;              // phi evaluations available to the pattern search
    double tol_dir_sigma = 2.0;    // width of the minimizing-direction band, in std errors
    bool use_marching = true;      // phase 1 pruning
    int march_probes = 0;          // 0 -> 4 + 2*dim
    std::int64_t march_samples = 40000;
};

struct FairCutResult {
    Point center;
    VolumeEstimate phi;
    std::vector<TangentVector> minimizing_directions;  // band around the minimum
    std::vector<TangentVector> selected;               // <= dim+1, still covering
    std::vector<TraceEntry> trace;
    bool converged = false;
    bool on_boundary = false;
    bool covering = false;
    bool within_bounds = false;  // 1/(m+1) - 4se <= phi <= 1/2 + 4se
};

// Shared-cloud evaluator for cut fractions at a probe point: one sample set
// serves every direction (common random numbers), so fraction(v) +
// fraction(-v) = 1 exactly and comparisons between directions are low-noise.
class CutEvaluator {
public:
    CutEvaluator(const ConvexDomain& domain, std::int64_t n, std::uint64_t seed);

    const ConvexDomain& domain() const { return domain_; }
    std::int64_t n() const { return static_cast<std::int64_t>(cloud_.size()); }
    std::uint64_t seed() const { return seed_; }
    const std::vector<Point>& cloud() const { return cloud_; }
    const Point& probe() const { return probe_; }
    const std::vector<Vec>& basis() const { return basis_; }

    void set_probe(const Point& x);

    // dir given in tangent-basis coordinates at the probe (unit length).
    double fraction(const Vec& dir) const;
    VolumeEstimate estimate(double fraction) const;
    TangentVector direction(const Vec& dir) const;  // basis coords -> ambient tangent

    // Minimum of the cut fraction over the unit tangent sphere: exhaustive
    // angular scan + golden-section refinement for dim 2, multistart
    // Nelder-Mead in a local chart for dim >= 3. found_dirs, when given,
    // collects the converged direction of every start (basis coordinates).
    PhiResult minimize(int multistarts, std::uint64_t start_seed,
                       const std::vector<Vec>* warm_dirs = nullptr,
                       std::vector<Vec>* found_dirs = nullptr) const;

    // Directions whose fraction is within tol of fmin, from a 512-angle scan
    // (dim 2) or n_dirs random directions (dim >= 3).
    std::vector<TangentVector> directions_within(double fmin, double tol, int n_dirs,
                                                 std::uint64_t seed) const;

private:
    double fraction_angle(double theta) const;  // dim-2 fast path (sorted angles)

    ConvexDomain domain_;
    std::uint64_t seed_ = 0;
    std::vector<Point> cloud_;
    Point probe_;
    std::vector<Vec> basis_;
    std::vector<double> coords_;  // n x dim tangent coordinates of unit directions
    std::vector<double> angles_;  // dim-2: sorted direction angles
    std::int64_t at_probe_ = 0;   // samples coinciding with the probe point
};

// f_x(v): volume fraction of H(x,v) within the domain.
VolumeEstimate cut_fraction(const ConvexDomain& domain, const Point& x, const TangentVector& v,
                            std::int64_t n, std::uint64_t seed);

// phi_M(x) = min_v f_x(v): the minimum cut fraction over the unit tangent
// sphere at x. The overload with tol_dir also collects the directions whose
// fraction lies within tol_dir of the minimum.
PhiResult phi(const ConvexDomain& domain, const Point& x, std::int64_t n, std::uint64_t seed);
PhiResult phi(const ConvexDomain& domain, const Point& x, std::int64_t n, std::uint64_t seed,
              double tol_dir, std::vector<TangentVector>& minimizing_directions);

// Exact phi for planar (k=0, m=2) simplex domains: minimum over cut
// directions of the clipped area fraction, by a 256-angle scan plus
// golden-section refinement to angular tolerance 1e-7.
double phi_exact_2d(const ConvexDomain& domain, const Point& x);

// max_x phi_M(x): marching-hyperplanes pruning, then pattern search over
// geodesic probes with a shrinking step.
FairCutResult fair_cut_search(const ConvexDomain& domain, const FairCutOptions& opts = {});

// True iff 0 lies in the convex hull of V inside the tangent space at x0
// (pairwise Frank-Wolfe minimum-norm point); equivalently the half-spaces
// H(x0,v), v in V, cover the whole space.
bool covering_check(const CurvatureSpace& s, const Point& x0, const std::vector<TangentVector>& V);

// <= dim+1 vectors of V whose convex hull still contains 0.
std::vector<TangentVector> caratheodory_select(const CurvatureSpace& s, const Point& x0,
                                               const std::vector<TangentVector>& V);

// For x strictly inside H0: the half-space based at x, directed away from the
// nearest boundary point of H0, which is contained in H0 (constant curvature).
HalfSpace nested_half_space(const ConvexDomain& domain, const HalfSpace& h0, const Point& x);

nlohmann::json faircut_report_json(const FairCutResult& res, const CurvatureSpace& s);
std::string faircut_trace_csv(const FairCutResult& res);

}  // namespace corecut
