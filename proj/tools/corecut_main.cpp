// corecut: congestion cores, fair cuts, and geodesic traffic densities in
// constant-curvature convex domains and weighted graphs.
//
// Subcommands: faircut | core | march | graph | conjecture.
// Every run writes <out>/report.json (plus command-specific CSVs); identical
// config + seed reproduce the reports byte for byte.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "corecut/congestion.hpp"
#include "corecut/domain.hpp"
#include "corecut/errors.hpp"
#include "corecut/faircut.hpp"
#include "corecut/graph.hpp"
#include "corecut/json_util.hpp"
#include "corecut/marching.hpp"
#include "corecut/rng.hpp"
#include "corecut/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace corecut;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNotConverged = 2;

struct CommonFlags {
    std::string config_path;
    std::string out;
    std::int64_t samples = -1;
    std::int64_t seed = -1;
    int threads = -1;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "experiment configuration file (JSON)");
    cmd->add_option("--samples", f.samples, "Monte Carlo sample count");
    cmd->add_option("--seed", f.seed, "top-level seed");
    cmd->add_option("--out", f.out, "output directory (default: out)");
    cmd->add_option("--threads", f.threads, "worker threads for chunked sampling");
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file \"" + path + "\"");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError("config file \"" + path + "\": " + e.what());
    }
    if (!j.is_object()) throw ParseError("config file must hold a JSON object");
    return j;
}

// Flags win over config values; missing entries fall back to defaults.
std::int64_t effective_i64(const json& cfg, const char* key, std::int64_t flag, std::int64_t dflt) {
    if (flag >= 0) return flag;
    if (cfg.contains(key)) return cfg.at(key).get<std::int64_t>();
    return dflt;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const json& effective) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(effective.dump())));
    return std::string(buf);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write \"" + path.string() + "\"");
    out << text;
}

void write_report(const fs::path& dir, const json& report) {
    fs::create_directories(dir);
    write_text(dir / "report.json", report.dump(2) + "\n");
}

json envelope(const std::string& command, const json& effective, std::uint64_t seed) {
    json j;
    j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    j["command"] = command;
    j["config_hash"] = config_hash(effective);
    j["seed"] = seed;
    return j;
}

ConvexDomain domain_from_config(const json& cfg) {
    if (!cfg.contains("domain")) throw ParseError("config: missing \"domain\"");
    return domain_from_json(cfg.at("domain"));
}

double parse_threshold(const json& v, int dim) {
    if (v.is_number()) {
        const double t = v.get<double>();
        if (!(t > 0.0 && t < 1.0)) throw ParseError("threshold must lie in (0,1)");
        return t;
    }
    const std::string s = v.get<std::string>();
    if (s == "1/e") return 1.0 / 2.718281828459045235360287471353;
    if (s == "1/(m+1)") return 1.0 / (dim + 1);
    try {
        return parse_threshold(json(std::stod(s)), dim);
    } catch (const ParseError&) {
        throw;
    } catch (...) {
        throw ParseError("threshold: expected a number, \"1/(m+1)\", or \"1/e\"");
    }
}

std::string csv_profile(const std::vector<TrafficReport>& profile) {
    std::ostringstream out;
    out.precision(17);
    out << "r,density,std_error\n";
    for (const TrafficReport& rep : profile)
        out << rep.r << ',' << rep.density.fraction << ',' << rep.density.std_error << "\n";
    return out.str();
}

void apply_threads(const json& cfg, const CommonFlags& flags) {
    set_thread_count(static_cast<int>(effective_i64(cfg, "threads", flags.threads, 1)));
}

std::string out_dir(const json& cfg, const CommonFlags& flags) {
    if (!flags.out.empty()) return flags.out;
    if (cfg.contains("out")) return cfg.at("out").get<std::string>();
    return "out";
}

// ---------------------------------------------------------------------------

int cmd_faircut(const CommonFlags& flags, std::int64_t budget_flag) {
    const json cfg = load_config(flags.config_path);
    check_allowed_keys(cfg,
                       {"domain", "samples", "seed", "out", "threads", "budget", "march_probes",
                        "search_samples", "marching"},
                       "faircut config");
    const ConvexDomain domain = domain_from_config(cfg);
    apply_threads(cfg, flags);

    FairCutOptions opts;
    opts.samples = effective_i64(cfg, "samples", flags.samples, kDefaultSamples);
    opts.seed = static_cast<std::uint64_t>(effective_i64(cfg, "seed", flags.seed, 0));
    opts.budget = static_cast<int>(effective_i64(cfg, "budget", budget_flag, 400));
    opts.march_probes = static_cast<int>(effective_i64(cfg, "march_probes", -1, 0));
    opts.search_samples = effective_i64(cfg, "search_samples", -1, 0);
    if (cfg.contains("marching")) opts.use_marching = cfg.at("marching").get<bool>();

    json effective;
    effective["command"] = "faircut";
    effective["domain"] = domain_to_json(domain);
    effective["samples"] = opts.samples;
    effective["seed"] = opts.seed;
    effective["budget"] = opts.budget;
    effective["march_probes"] = opts.march_probes;
    effective["search_samples"] = opts.search_samples;
    effective["marching"] = opts.use_marching;

    const FairCutResult res = fair_cut_search(domain, opts);

    json report = envelope("faircut", effective, opts.seed);
    report["samples"] = opts.samples;
    report["domain"] = domain_to_json(domain);
    report["result"] = faircut_report_json(res, domain.space());

    const fs::path dir = out_dir(cfg, flags);
    write_report(dir, report);
    write_text(dir / "phi_trace.csv", faircut_trace_csv(res));
    std::cout << "faircut: phi = " << res.phi.fraction << " +- " << res.phi.std_error
              << (res.converged ? "" : "  [NOT CONVERGED]") << "\n";
    return res.converged ? kExitOk : kExitNotConverged;
}

int cmd_core(const CommonFlags& flags, std::int64_t pairs_flag, std::int64_t budget_flag) {
    const json cfg = load_config(flags.config_path);
    check_allowed_keys(cfg,
                       {"domain", "samples", "seed", "out", "threads", "pairs", "radii", "budget"},
                       "core config");
    const ConvexDomain domain = domain_from_config(cfg);
    apply_threads(cfg, flags);
    if (domain.space().euclidean())
        throw UnsupportedError(
            "core: the blocking radius diverges as curvature approaches 0; use a domain with "
            "k > 0");

    FairCutOptions opts;
    opts.samples = effective_i64(cfg, "samples", flags.samples, kDefaultSamples);
    opts.seed = static_cast<std::uint64_t>(effective_i64(cfg, "seed", flags.seed, 0));
    opts.budget = static_cast<int>(effective_i64(cfg, "budget", budget_flag, 400));
    const std::int64_t pairs = effective_i64(cfg, "pairs", pairs_flag, kDefaultSamples);

    const double r0 = blocking_radius(domain.space().k);
    std::vector<double> radii;
    if (cfg.contains("radii")) {
        for (const auto& r : cfg.at("radii")) radii.push_back(r.get<double>());
    } else {
        for (int i = 1; i <= 10; ++i) radii.push_back(r0 * 0.2 * i);
    }

    json effective;
    effective["command"] = "core";
    effective["domain"] = domain_to_json(domain);
    effective["samples"] = opts.samples;
    effective["seed"] = opts.seed;
    effective["budget"] = opts.budget;
    effective["pairs"] = pairs;
    effective["radii"] = radii;

    const CongestionCore core = congestion_core(domain, opts, pairs);
    const std::vector<TrafficReport> profile =
        traffic_profile(domain, core.center, radii, pairs, derive_seed(opts.seed, "core-profile"));

    json report = envelope("core", effective, opts.seed);
    report["samples"] = opts.samples;
    report["pairs"] = pairs;
    report["domain"] = domain_to_json(domain);
    report["center"] = core.center.c;
    report["blocking_radius"] = core.radius;
    report["density"] = traffic_report_json(core.report);
    report["bound_ok"] = core.bound_ok;
    report["dim_bound"] = 1.0 / (domain.space().dim + 1);
    report["faircut"] = faircut_report_json(core.faircut, domain.space());
    {
        json prof = json::array();
        for (const TrafficReport& rep : profile)
            prof.push_back({{"r", rep.r},
                            {"density", rep.density.fraction},
                            {"std_error", rep.density.std_error}});
        report["profile"] = std::move(prof);
    }

    const fs::path dir = out_dir(cfg, flags);
    write_report(dir, report);
    write_text(dir / "density_profile.csv", csv_profile(profile));
    std::cout << "core: density(x0, r0) = " << core.report.density.fraction << " +- "
              << core.report.density.std_error << " (bound " << 1.0 / (domain.space().dim + 1)
              << ")\n";
    return core.faircut.converged ? kExitOk : kExitNotConverged;
}

int cmd_march(const CommonFlags& flags, std::int64_t probes_flag,
              const std::string& threshold_flag) {
    const json cfg = load_config(flags.config_path);
    check_allowed_keys(cfg, {"domain", "samples", "seed", "out", "threads", "probes", "threshold"},
                       "march config");
    const ConvexDomain domain = domain_from_config(cfg);
    apply_threads(cfg, flags);
    const int m = domain.space().dim;

    const std::int64_t samples = effective_i64(cfg, "samples", flags.samples, kDefaultSamples);
    const std::uint64_t seed = static_cast<std::uint64_t>(effective_i64(cfg, "seed", flags.seed, 0));
    const int probes = static_cast<int>(effective_i64(cfg, "probes", probes_flag, 4 + 2 * m));
    json threshold_raw = json("1/(m+1)");
    if (!threshold_flag.empty())
        threshold_raw = json(threshold_flag);
    else if (cfg.contains("threshold"))
        threshold_raw = cfg.at("threshold");
    const double threshold = parse_threshold(threshold_raw, m);

    if (probes < m + 1)
        std::cerr << "warning: " << probes << " probes is below dim+1 = " << (m + 1)
                  << "; the region may be poorly localized\n";

    json effective;
    effective["command"] = "march";
    effective["domain"] = domain_to_json(domain);
    effective["samples"] = samples;
    effective["seed"] = seed;
    effective["probes"] = probes;
    effective["threshold"] = threshold;

    const MarchRegion region = march_region(domain, probes, threshold, samples, seed);
    const RegionSummary summary =
        region_summary(region, domain, samples, derive_seed(seed, "summary"));

    json report = envelope("march", effective, seed);
    report["samples"] = samples;
    report["domain"] = domain_to_json(domain);
    report["region"] = region_report_json(region, summary);

    // point cloud of the surviving region for plotting
    std::ostringstream cloud_csv;
    cloud_csv.precision(17);
    const int amb = domain.space().ambient_dim();
    for (int i = 0; i < amb; ++i) cloud_csv << (i ? "," : "") << "x" << i;
    cloud_csv << "\n";
    const UniformSampler sampler(domain);
    const std::vector<Point> cloud =
        sampler.sample_cloud(std::min<std::int64_t>(samples, 20000), derive_seed(seed, "points"));
    for (const Point& p : cloud) {
        if (!region.contains(p)) continue;
        for (int i = 0; i < amb; ++i) cloud_csv << (i ? "," : "") << p.c[i];
        cloud_csv << "\n";
    }

    const fs::path dir = out_dir(cfg, flags);
    write_report(dir, report);
    write_text(dir / "region_points.csv", cloud_csv.str());
    std::cout << "march: region volume fraction = " << summary.volume_fraction.fraction << " +- "
              << summary.volume_fraction.std_error << ", " << region.excluded.size()
              << " half-spaces\n";
    return kExitOk;
}

int cmd_graph(const CommonFlags& flags, const std::string& input_flag,
              const std::string& mode_flag) {
    const json cfg = load_config(flags.config_path);
    check_allowed_keys(cfg, {"input", "radii", "mode", "delta", "seed", "out", "threads"},
                       "graph config");
    apply_threads(cfg, flags);

    std::string input = input_flag;
    if (input.empty() && cfg.contains("input")) input = cfg.at("input").get<std::string>();
    if (input.empty()) throw ParseError("graph: missing edge-list path (--input or config)");
    std::string mode_name = mode_flag;
    if (mode_name.empty()) mode_name = cfg.value("mode", "any-geodesic");
    const TrafficMode mode = traffic_mode_from_name(mode_name);
    std::vector<double> radii;
    if (cfg.contains("radii"))
        for (const auto& r : cfg.at("radii")) radii.push_back(r.get<double>());
    const bool with_delta = cfg.value("delta", true);

    const WeightedGraph g = load_graph(input);

    json effective;
    effective["command"] = "graph";
    effective["input"] = input;
    effective["mode"] = traffic_mode_name(mode);
    effective["radii"] = radii;
    effective["delta"] = with_delta;

    const GraphTrafficReport rep = core_report(g, radii, mode, with_delta);

    json report = envelope("graph", effective, 0);
    report["input"] = input;
    report["report"] = graph_report_json(rep, g);

    const fs::path dir = out_dir(cfg, flags);
    write_report(dir, report);
    write_text(dir / "vertices.csv", graph_report_csv(rep));
    std::cout << "graph: core vertex " << rep.core_vertex
              << " with D = " << rep.density0[rep.core_vertex];
    if (rep.delta >= 0.0) std::cout << ", delta = " << rep.delta;
    std::cout << "\n";
    return kExitOk;
}

int cmd_conjecture(const CommonFlags& flags, std::int64_t mmin_flag, std::int64_t mmax_flag) {
    const json cfg = load_config(flags.config_path);
    check_allowed_keys(cfg, {"m_min", "m_max", "samples", "seed", "out", "threads"},
                       "conjecture config");
    apply_threads(cfg, flags);
    const int m_min = static_cast<int>(effective_i64(cfg, "m_min", mmin_flag, 2));
    const int m_max = static_cast<int>(effective_i64(cfg, "m_max", mmax_flag, 4));
    if (m_min < 2 || m_max < m_min) throw ParseError("conjecture: need 2 <= m_min <= m_max");
    const std::int64_t samples = effective_i64(cfg, "samples", flags.samples, kDefaultSamples);
    const std::uint64_t seed = static_cast<std::uint64_t>(effective_i64(cfg, "seed", flags.seed, 0));

    json effective;
    effective["command"] = "conjecture";
    effective["m_min"] = m_min;
    effective["m_max"] = m_max;
    effective["samples"] = samples;
    effective["seed"] = seed;

    const double inv_e = 1.0 / 2.718281828459045235360287471353;
    json findings = json::array();
    std::ostringstream csv;
    csv.precision(17);
    csv << "m,phi,std_error,exact,simplex_value,diff,simplex_consistent,one_over_e_consistent\n";
    for (int m = m_min; m <= m_max; ++m) {
        // standard simplex in R^m, curvature 0
        CurvatureSpace s{m, 0.0};
        std::vector<Point> verts;
        verts.push_back(Point{Vec(m, 0.0)});
        for (int i = 0; i < m; ++i) {
            Vec v(m, 0.0);
            v[i] = 1.0;
            verts.push_back(Point{std::move(v)});
        }
        const ConvexDomain domain = make_simplex(s, std::move(verts));
        const Point centroid = domain.probe_center();

        const double conj = std::pow(static_cast<double>(m) / (m + 1), m);
        double value = 0.0, se = 0.0;
        bool exact = false;
        if (m == 2) {
            value = phi_exact_2d(domain, centroid);
            exact = true;
        } else {
            const PhiResult r = phi(domain, centroid, samples, derive_seed(seed, static_cast<std::uint64_t>(m)));
            value = r.value.fraction;
            se = r.value.std_error;
        }
        const double tol = exact ? 1e-9 : 4.0 * se;
        const bool simplex_ok = std::abs(value - conj) <= tol;
        const bool e_ok = value >= inv_e - (exact ? 1e-9 : 4.0 * se);
        findings.push_back({{"m", m},
                            {"phi", value},
                            {"std_error", se},
                            {"exact", exact},
                            {"simplex_value", conj},
                            {"diff", value - conj},
                            {"simplex_consistent", simplex_ok},
                            {"one_over_e", inv_e},
                            {"one_over_e_consistent", e_ok}});
        csv << m << ',' << value << ',' << se << ',' << (exact ? 1 : 0) << ',' << conj << ','
            << (value - conj) << ',' << (simplex_ok ? 1 : 0) << ',' << (e_ok ? 1 : 0) << "\n";
        std::cout << "m=" << m << ": phi(barycenter) = " << value
                  << (exact ? " (exact)" : " +- " + std::to_string(se))
                  << ", (m/(m+1))^m = " << conj
                  << (simplex_ok ? "  [consistent]" : "  [DISAGREES]") << "\n";
    }

    json report = envelope("conjecture", effective, seed);
    report["samples"] = samples;
    report["findings"] = std::move(findings);

    const fs::path dir = out_dir(cfg, flags);
    write_report(dir, report);
    write_text(dir / "findings.csv", csv.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"congestion cores and fair cuts in constant-curvature convex domains"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);

    CommonFlags f_faircut, f_core, f_march, f_graph, f_conj;
    std::int64_t budget = -1, core_budget = -1, pairs = -1, probes = -1, mmin = -1, mmax = -1;
    std::string threshold, graph_input, graph_mode;

    CLI::App* c_faircut = app.add_subcommand("faircut", "fair-cut index and center");
    add_common_flags(c_faircut, f_faircut);
    c_faircut->add_option("--budget", budget, "pattern-search evaluation budget");

    CLI::App* c_core = app.add_subcommand("core", "congestion core and traffic density");
    add_common_flags(c_core, f_core);
    c_core->add_option("--pairs", pairs, "endpoint pairs for the density estimate");
    c_core->add_option("--budget", core_budget, "pattern-search evaluation budget");

    CLI::App* c_march = app.add_subcommand("march", "marching-hyperplanes center localization");
    add_common_flags(c_march, f_march);
    c_march->add_option("--probes", probes, "boundary probes");
    c_march->add_option("--threshold", threshold, "volume fraction: number, 1/(m+1), or 1/e");

    CLI::App* c_graph = app.add_subcommand("graph", "discrete traffic density on an edge list");
    add_common_flags(c_graph, f_graph);
    c_graph->add_option("--input", graph_input, "edge-list file");
    c_graph->add_option("--mode", graph_mode, "any-geodesic | unique-only");

    CLI::App* c_conj = app.add_subcommand("conjecture", "simplex fair-cut conjecture sweep");
    add_common_flags(c_conj, f_conj);
    c_conj->add_option("--m-min", mmin, "smallest dimension");
    c_conj->add_option("--m-max", mmax, "largest dimension");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_faircut->parsed()) return cmd_faircut(f_faircut, budget);
        if (c_core->parsed()) return cmd_core(f_core, pairs, core_budget);
        if (c_march->parsed()) return cmd_march(f_march, probes, threshold);
        if (c_graph->parsed()) return cmd_graph(f_graph, graph_input, graph_mode);
        if (c_conj->parsed()) return cmd_conjecture(f_conj, mmin, mmax);
    } catch (const SamplingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNotConverged;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
