#include "opcwalk/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "opcwalk/csvio.hpp"
#include "opcwalk/hashing.hpp"
#include "opcwalk/mixing.hpp"
#include "opcwalk/pairwalk.hpp"
#include "opcwalk/parallel.hpp"
#include "opcwalk/regeneration.hpp"
#include "opcwalk/stats.hpp"
#include "opcwalk/walker.hpp"

namespace opcwalk {

using nlohmann::json;

namespace {

// Replica-index blocks for runner-level loops, disjoint from the blocks the
// pair module reserves (0x1..0x3 << 36) and from the small indices the CLT
// experiment uses internally.
constexpr std::uint64_t kDriftBlock = 0x5000000000ull;
constexpr std::uint64_t kTailBlock = 0x6000000000ull;
constexpr std::uint64_t kTailPairBlock = 0x7000000000ull;
constexpr std::uint64_t kBergerBlock = 0x8000000000ull;
constexpr std::uint64_t kOracleBlock = 0x9000000000ull;

struct OutputSink {
    std::filesystem::path dir;
    std::vector<std::string>* files;

    std::string path_for(const std::string& name) const { return (dir / name).string(); }

    CsvWriter csv(const std::string& name, const std::vector<std::string>& header) const {
        files->push_back(name);
        return CsvWriter(path_for(name), header);
    }

    void write_json(const std::string& name, const json& doc) const {
        files->push_back(name);
        std::ofstream out(path_for(name));
        if (!out) throw std::runtime_error("cannot open output file: " + path_for(name));
        out << doc.dump(2) << '\n';
    }
};

json vec_to_json(const Vec& v, int d) {
    json arr = json::array();
    for (int i = 0; i < d; ++i) arr.push_back(v[static_cast<std::size_t>(i)]);
    return arr;
}

json matrix_to_json(const Matrix& m, int d) {
    json rows = json::array();
    for (int i = 0; i < d; ++i) {
        json row = json::array();
        for (int j = 0; j < d; ++j) row.push_back(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------- drift ----

bool run_drift(const ExperimentConfig& cfg, const OutputSink& out) {
    const int d = cfg.lattice.d;
    std::vector<RegenerationRecord> records = replica_map<RegenerationRecord>(
        static_cast<std::size_t>(cfg.replicas), cfg.threads, [&](std::size_t i) {
            ConditionedEnvironment ce = condition_on_origin(
                derive_seed(cfg.master_seed, SeedTag::replica, kDriftBlock + i), cfg.lattice, cfg.weight_spec);
            return find_regenerations(make_site({}, 0), static_cast<int>(cfg.steps), cfg.m, *ce.env,
                                      derive_seed(cfg.master_seed, SeedTag::walk_rng, kDriftBlock + i), cfg.regen);
        });

    bool partial = false;
    {
        std::vector<std::string> header{"record", "n", "T_n", "tau_n"};
        for (int j = 1; j <= d; ++j) header.push_back("y_" + std::to_string(j));
        CsvWriter csv = out.csv("records.csv", header);
        for (std::size_t r = 0; r < records.size(); ++r) {
            const RegenerationRecord& rec = records[r];
            if (!rec.complete) partial = true;
            for (std::size_t i = 0; i < rec.increments(); ++i) {
                std::vector<std::string> row{std::to_string(r), std::to_string(i + 1),
                                             std::to_string(rec.times[i + 1]), std::to_string(rec.tau(i))};
                const auto y = rec.displacement(i);
                for (int j = 0; j < d; ++j) row.push_back(std::to_string(y[static_cast<std::size_t>(j)]));
                csv.write_row_strings(row);
            }
        }
    }

    const DriftEstimate drift = estimate_drift(records);
    json doc;
    doc["mu_hat"] = vec_to_json(drift.mu_hat, d);
    doc["std_error"] = vec_to_json(drift.std_error, d);
    doc["n_increments"] = drift.n_increments;
    doc["batches"] = drift.batches;
    doc["complete"] = !partial;
    const int lag = static_cast<int>(std::min<long long>(20, cfg.steps - 1));
    try {
        const CovarianceEstimate cov = estimate_covariance(records, lag);
        doc["sigma_hat"] = matrix_to_json(cov.sigma, d);
        doc["lag_cutoff"] = cov.lag_cutoff;
    } catch (const std::invalid_argument&) {
        doc["sigma_hat"] = nullptr;  // too few increments for the lag window
    }
    out.write_json("drift.json", doc);
    return partial;
}

// --------------------------------------------------------------- berger ----

bool run_berger(const ExperimentConfig& cfg, const OutputSink& out) {
    const int d = cfg.lattice.d;
    std::vector<Site> ends = replica_map<Site>(static_cast<std::size_t>(cfg.replicas), cfg.threads, [&](std::size_t i) {
        ConditionedEnvironment ce = condition_on_origin(derive_seed(cfg.master_seed, SeedTag::replica, kBergerBlock + i),
                                                        cfg.lattice, cfg.weight_spec);
        CounterRng rng(derive_seed(cfg.master_seed, SeedTag::walk_rng, kBergerBlock + i));
        return walk_endpoint(make_site({}, 0), static_cast<int>(cfg.steps), *ce.env, rng);
    });

    std::vector<std::string> header{"replica"};
    for (int j = 1; j <= d; ++j) header.push_back("x_" + std::to_string(j));
    for (int j = 1; j <= d; ++j) header.push_back("ratio_" + std::to_string(j));
    CsvWriter csv = out.csv("walks.csv", header);
    Vec mean{}, sq{};
    for (std::size_t i = 0; i < ends.size(); ++i) {
        std::vector<std::string> row{std::to_string(i)};
        for (int j = 0; j < d; ++j) row.push_back(std::to_string(ends[i].x[static_cast<std::size_t>(j)]));
        for (int j = 0; j < d; ++j) {
            const double ratio = static_cast<double>(ends[i].x[static_cast<std::size_t>(j)]) /
                                 static_cast<double>(cfg.steps);
            row.push_back(format_double(ratio));
            mean[static_cast<std::size_t>(j)] += ratio;
            sq[static_cast<std::size_t>(j)] += ratio * ratio;
        }
        csv.write_row_strings(row);
    }
    const double n = static_cast<double>(ends.size());
    Vec se{};
    for (int j = 0; j < d; ++j) {
        mean[static_cast<std::size_t>(j)] /= n;
        const double var = n > 1 ? (sq[static_cast<std::size_t>(j)] - n * mean[static_cast<std::size_t>(j)] *
                                                                          mean[static_cast<std::size_t>(j)]) /
                                       (n - 1)
                                 : 0.0;
        se[static_cast<std::size_t>(j)] = std::sqrt(std::max(var, 0.0) / n);
    }
    json doc;
    doc["mu_hat"] = vec_to_json(mean, d);
    doc["std_error"] = vec_to_json(se, d);
    doc["steps"] = cfg.steps;
    doc["replicas"] = cfg.replicas;
    out.write_json("drift.json", doc);
    return false;
}

// ------------------------------------------------------------------ clt ----

bool run_clt(const ExperimentConfig& cfg, CltMode mode, const OutputSink& out) {
    CltConfig cc;
    cc.lattice = cfg.lattice;
    cc.weight_spec = cfg.weight_spec;
    cc.m = cfg.m;
    cc.steps = cfg.steps;
    cc.replicas = cfg.replicas;
    cc.environments = cfg.environments;
    cc.master_seed = cfg.master_seed;
    cc.threads = cfg.threads;
    cc.drift_presteps = cfg.clt_presteps;
    const CltReport report = clt_experiment(mode, cc);
    const int d = cfg.lattice.d;

    {
        std::vector<std::string> header{"environment", "replica"};
        for (int j = 1; j <= d; ++j) header.push_back("z_" + std::to_string(j));
        CsvWriter csv = out.csv("clt_samples.csv", header);
        for (std::size_t e = 0; e < report.env_samples.size(); ++e)
            for (std::size_t r = 0; r < report.env_samples[e].size(); ++r) {
                std::vector<std::string> row{std::to_string(e), std::to_string(r)};
                for (int j = 0; j < d; ++j)
                    row.push_back(format_double(report.env_samples[e][r][static_cast<std::size_t>(j)]));
                csv.write_row_strings(row);
            }
    }

    {
        // Per-coordinate QQ data: standardized order statistics against the
        // normal quantiles at the usual plotting positions (i - 1/2) / n.
        CsvWriter csv = out.csv("qq.csv", {"environment", "coordinate", "theoretical_quantile", "empirical_quantile"});
        for (std::size_t e = 0; e < report.env_samples.size(); ++e) {
            for (int j = 0; j < d; ++j) {
                std::vector<double> col;
                col.reserve(report.env_samples[e].size());
                for (const Vec& s : report.env_samples[e]) col.push_back(s[static_cast<std::size_t>(j)]);
                double mean = 0;
                for (double x : col) mean += x;
                mean /= static_cast<double>(col.size());
                double var = 0;
                for (double x : col) var += (x - mean) * (x - mean);
                var /= static_cast<double>(col.size() - 1);
                const double sd = std::sqrt(var);
                std::sort(col.begin(), col.end());
                for (std::size_t i = 0; i < col.size(); ++i) {
                    const double q = normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(col.size()));
                    const double z = sd > 0 ? (col[i] - mean) / sd : 0.0;
                    csv.write_row(e, j + 1, q, z);
                }
            }
        }
    }

    json doc;
    doc["mode"] = mode == CltMode::annealed ? "annealed" : "quenched";
    doc["drift_used"] = vec_to_json(report.drift_used, d);
    doc["scale_used"] = matrix_to_json(report.scale_used, d);
    doc["leak_steps"] = report.leak_steps;
    json envs = json::array();
    for (std::size_t e = 0; e < report.per_environment.size(); ++e) {
        const NormalityReport& nr = report.per_environment[e];
        envs.push_back({{"n", nr.n},
                        {"ks_distance", nr.ks_distance},
                        {"qq_correlation", nr.qq_correlation},
                        {"standardized_mean", nr.standardized_mean},
                        {"standardized_variance", nr.standardized_variance},
                        {"mean", vec_to_json(report.env_means[e], d)}});
    }
    doc["environments"] = envs;
    out.write_json("report.json", doc);
    return false;
}

// ----------------------------------------------------------------- tail ----

void write_survival(CsvWriter& csv, const std::string& which, const std::vector<long long>& samples) {
    std::vector<long long> sorted(samples);
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::size_t idx = 0;
    const long long hi = sorted.back();
    for (long long t = 0; t <= hi; ++t) {
        while (idx < sorted.size() && sorted[idx] <= t) ++idx;
        const double surv = (n - static_cast<double>(idx)) / n;
        if (surv <= 0) break;
        csv.write_row(which, t, surv);
    }
}

json tail_fit_json(const std::vector<long long>& samples) {
    try {
        const TailFit fit = fit_tail(samples);
        return {{"rate", fit.rate},
                {"prefactor", fit.prefactor},
                {"r_squared", fit.r_squared},
                {"points", fit.points},
                {"samples", samples.size()}};
    } catch (const std::invalid_argument&) {
        // Too many drops (or a degenerate sample) left nothing to fit.
        return nullptr;
    }
}

bool run_tail(const ExperimentConfig& cfg, const OutputSink& out) {
    struct Draw {
        long long value = -1;  // -1: budget ran out
    };
    const Site origin = make_site({}, 0);

    std::vector<Draw> first = replica_map<Draw>(static_cast<std::size_t>(cfg.replicas), cfg.threads, [&](std::size_t i) {
        ConditionedEnvironment ce = condition_on_origin(derive_seed(cfg.master_seed, SeedTag::replica, kTailBlock + i),
                                                        cfg.lattice, cfg.weight_spec);
        RegenerationRecord rec = find_regenerations(origin, 1, cfg.m, *ce.env,
                                                    derive_seed(cfg.master_seed, SeedTag::walk_rng, kTailBlock + i),
                                                    cfg.regen);
        Draw d;
        if (rec.complete) d.value = rec.times[1];
        return d;
    });

    std::vector<Draw> pair;
    if (cfg.tail.include_pair) {
        Site x2 = origin;
        x2.x[0] = cfg.tail.separation;
        pair = replica_map<Draw>(static_cast<std::size_t>(cfg.replicas), cfg.threads, [&](std::size_t i) {
            ConditionedEnvironment ce =
                condition_on_sites(derive_seed(cfg.master_seed, SeedTag::replica, kTailPairBlock + i), cfg.lattice,
                                   cfg.weight_spec, {origin, x2});
            PairOptions opts;
            opts.regen = cfg.regen;
            PairWalkRecord rec = run_pair(PairMode::joint, origin, x2, 1, cfg.m, *ce.env, *ce.env,
                                          derive_seed(cfg.master_seed, SeedTag::walk_rng, kTailPairBlock + 2 * i),
                                          derive_seed(cfg.master_seed, SeedTag::walk_rng, kTailPairBlock + 2 * i + 1),
                                          opts);
            Draw d;
            if (rec.complete) d.value = rec.sim_times[1];
            return d;
        });
    }

    bool partial = false;
    std::vector<long long> t1, tsim;
    for (const Draw& d : first) {
        if (d.value < 0) partial = true;
        else t1.push_back(d.value);
    }
    for (const Draw& d : pair) {
        if (d.value < 0) partial = true;
        else tsim.push_back(d.value);
    }

    CsvWriter csv = out.csv("tail.csv", {"which", "t", "survival"});
    if (!t1.empty()) write_survival(csv, "T1", t1);
    if (!tsim.empty()) write_survival(csv, "Tsim1", tsim);

    json doc;
    doc["T1"] = tail_fit_json(t1);
    if (cfg.tail.include_pair) {
        doc["Tsim1"] = tail_fit_json(tsim);
        doc["separation"] = cfg.tail.separation;
    }
    doc["dropped"] = cfg.replicas * (cfg.tail.include_pair ? 2 : 1) -
                     static_cast<long long>(t1.size() + tsim.size());
    out.write_json("tail.json", doc);
    return partial;
}

// --------------------------------------------------------------- mixing ----

bool run_mixing(const ExperimentConfig& cfg, const OutputSink& out) {
    const MixingMode mode = cfg.mixing.mode == "phi" ? MixingMode::phi : MixingMode::alpha;
    const MixingAxis axis = cfg.mixing.axis == "space"     ? MixingAxis::space
                            : cfg.mixing.axis == "spacetime" ? MixingAxis::spacetime
                                                             : MixingAxis::time;
    const MixingEstimate est =
        estimate_mixing(cfg.weight_spec, cfg.lattice.d, mode, axis, cfg.mixing.gaps,
                        static_cast<std::size_t>(cfg.replicas), derive_seed(cfg.master_seed, SeedTag::mixing, 0));

    CsvWriter csv = out.csv("mixing.csv", {"axis", "mode", "gap", "estimate", "ci_halfwidth", "samples"});
    for (std::size_t i = 0; i < est.gaps.size(); ++i)
        csv.write_row(to_string(est.axis), to_string(est.mode), est.gaps[i], est.coefficients[i], est.ci_halfwidth,
                      est.samples);

    json doc;
    doc["mode"] = to_string(est.mode);
    doc["axis"] = to_string(est.axis);
    doc["gaps"] = est.gaps;
    doc["coefficients"] = est.coefficients;
    doc["ci_halfwidth"] = est.ci_halfwidth;
    doc["samples"] = est.samples;
    doc["event_family"] = est.event_family;
    out.write_json("mixing.json", doc);
    return false;
}

// -------------------------------------------------------------- pair-tv ----

bool run_pair_tv(const ExperimentConfig& cfg, const OutputSink& out) {
    PairConfig pc;
    pc.lattice = cfg.lattice;
    pc.weight_spec = cfg.weight_spec;
    pc.m = cfg.m;
    pc.master_seed = cfg.master_seed;
    pc.threads = cfg.threads;
    pc.options.regen = cfg.regen;
    pc.options.tau_clip = cfg.pair.tau_clip;

    const Site origin = make_site({}, 0);
    bool partial = false;
    std::vector<double> seps, tvs;
    CsvWriter csv = out.csv("pair_tv.csv", {"separation", "tv_estimate", "ci_halfwidth", "n_joint", "n_indep", "n_dropped"});
    json rows = json::array();
    for (int sep : cfg.pair.separations) {
        Site x2 = origin;
        x2.x[0] = sep;
        const TvResult res = estimate_tv(origin, x2, cfg.pair.samples, pc);
        csv.write_row(sep, res.tv, res.ci_halfwidth, res.n_joint, res.n_indep, res.n_dropped);
        rows.push_back({{"separation", sep},
                        {"tv", res.tv},
                        {"ci_halfwidth", res.ci_halfwidth},
                        {"n_joint", res.n_joint},
                        {"n_indep", res.n_indep},
                        {"n_dropped", res.n_dropped}});
        if (res.n_dropped > 0) partial = true;
        if (res.tv > 0) {
            seps.push_back(static_cast<double>(sep));
            tvs.push_back(std::log(res.tv));
        }
    }

    json doc;
    doc["points"] = rows;
    if (seps.size() >= 2) {
        const LogLinearFit fit = loglinear_fit(seps, tvs);
        doc["log_tv_fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}};
    } else {
        doc["log_tv_fit"] = nullptr;
    }
    out.write_json("pair_tv.json", doc);
    return partial;
}

// -------------------------------------------------------------- annulus ----

bool run_annulus(const ExperimentConfig& cfg, const OutputSink& out) {
    PairConfig pc;
    pc.lattice = cfg.lattice;
    pc.weight_spec = cfg.weight_spec;
    pc.m = cfg.m;
    pc.master_seed = cfg.master_seed;
    pc.threads = cfg.threads;
    pc.options.regen = cfg.regen;
    pc.max_skeleton = cfg.annulus.max_skeleton;

    AnnulusSpec spec;
    spec.r1 = cfg.annulus.r1;
    spec.r2 = cfg.annulus.r2;
    if (cfg.annulus.has_sigma) spec.u = whitening_from_covariance(cfg.annulus.sigma, cfg.lattice.d);
    const AnnulusResult res = annulus_experiment(spec, cfg.annulus.r, cfg.annulus.samples, pc);

    CsvWriter csv = out.csv("annulus.csv", {"r", "p_hat", "ci_halfwidth", "f_d"});
    csv.write_row(res.realized_r, res.p_hat, res.ci_halfwidth, res.f_d_value);

    json doc;
    doc["r1"] = cfg.annulus.r1;
    doc["r2"] = cfg.annulus.r2;
    doc["requested_r"] = cfg.annulus.r;
    doc["realized_r"] = res.realized_r;
    json offset = json::array();
    for (int j = 0; j < cfg.lattice.d; ++j) offset.push_back(res.start_offset[static_cast<std::size_t>(j)]);
    doc["start_offset"] = offset;
    doc["p_hat"] = res.p_hat;
    doc["ci_halfwidth"] = res.ci_halfwidth;
    doc["f_d_value"] = res.f_d_value;
    doc["n_outward"] = res.n_outward;
    doc["n_inward"] = res.n_inward;
    doc["n_censored"] = res.n_censored;
    out.write_json("annulus.json", doc);
    return res.n_censored > 0;
}

// --------------------------------------------------------- oracle-check ----

bool run_oracle(const ExperimentConfig& cfg, const OutputSink& out) {
    const std::vector<OracleWindow> windows = oracle_windows();
    CsvWriter csv = out.csv("oracle.csv", {"window", "sampler", "runs", "tv"});
    json rows = json::array();
    double max_tv = 0;
    const std::size_t runs = static_cast<std::size_t>(cfg.oracle.runs);
    std::uint64_t stream = kOracleBlock;
    for (const OracleWindow& w : windows) {
        const Site start = make_site({}, 0);
        const ExactDistribution exact = exact_walk_distribution(*w.env, start, w.steps);
        for (const std::string& sampler : {std::string("sample_walk"), std::string("local_path")}) {
            const std::uint64_t base = stream;
            stream += runs;
            std::vector<Site> endpoints =
                replica_map<Site>(runs, cfg.threads, [&](std::size_t i) {
                    if (sampler == "sample_walk") {
                        CounterRng rng(derive_seed(cfg.master_seed, SeedTag::walk_rng, base + i));
                        return walk_endpoint(start, w.steps, *w.env, rng);
                    }
                    // Long budget: every prefix step sees a saturated lookahead.
                    const int k = w.steps + w.env->lattice().horizon + 1;
                    PermutationStream perms(derive_seed(cfg.master_seed, SeedTag::walk_rng, base + i));
                    return local_path(start, k, *w.env, perms).site_at(static_cast<std::size_t>(w.steps));
                });
            std::unordered_map<Site, std::size_t, SiteHasher> counts;
            for (const Site& s : endpoints) ++counts[s];
            const double tv = empirical_tv(exact, counts, runs);
            max_tv = std::max(max_tv, tv);
            csv.write_row(w.name, sampler, runs, tv);
            rows.push_back({{"window", w.name}, {"sampler", sampler}, {"runs", runs}, {"tv", tv}});
        }
    }
    json doc;
    doc["checks"] = rows;
    doc["max_tv"] = max_tv;
    out.write_json("oracle.json", doc);
    return false;
}

}  // namespace

std::vector<OracleWindow> oracle_windows() {
    LatticeConfig cfg;
    cfg.d = 1;
    cfg.p = 0.5;
    cfg.horizon = 4;

    std::vector<OracleWindow> out;

    // Fully open box with one heavy site: the first step splits 1 : 3.
    auto heavy = std::make_unique<WindowEnvironment>(cfg);
    heavy->open_box(0, 8, -8, 8);
    heavy->set_open(make_site({1}, 1), Rational(3));
    out.push_back({"heavy_right", std::move(heavy), 4});

    // Single open staircase: the walk is forced along it.
    auto stairs = std::make_unique<WindowEnvironment>(cfg);
    for (int k = 0; k <= 8; ++k) stairs->set_open(make_site({k}, k));
    out.push_back({"staircase", std::move(stairs), 4});

    // Open box with two punched-out sites and lopsided rational weights.
    auto lopsided = std::make_unique<WindowEnvironment>(cfg);
    for (int n = 0; n <= 8; ++n)
        for (int x = -8; x <= 8; ++x) {
            if (n == 2 && (x == 0 || x == 2)) continue;
            lopsided->set_open(make_site({x}, n));
        }
    lopsided->set_open(make_site({1}, 1), Rational(3));
    lopsided->set_open(make_site({-2}, 2), Rational(5));
    lopsided->set_open(make_site({-1}, 3), Rational(1, 2));
    out.push_back({"lopsided", std::move(lopsided), 4});

    return out;
}

RunManifest run_experiment(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.output_dir.empty()) throw std::invalid_argument("run_experiment: output_dir is empty");
    std::filesystem::create_directories(cfg.output_dir);

    RunManifest manifest;
    manifest.command = cfg.command;
    OutputSink sink{cfg.output_dir, &manifest.files};

    if (cfg.command == "drift") manifest.partial = run_drift(cfg, sink);
    else if (cfg.command == "berger") manifest.partial = run_berger(cfg, sink);
    else if (cfg.command == "clt") manifest.partial = run_clt(cfg, CltMode::annealed, sink);
    else if (cfg.command == "quenched-clt") manifest.partial = run_clt(cfg, CltMode::quenched, sink);
    else if (cfg.command == "tail") manifest.partial = run_tail(cfg, sink);
    else if (cfg.command == "mixing") manifest.partial = run_mixing(cfg, sink);
    else if (cfg.command == "pair-tv") manifest.partial = run_pair_tv(cfg, sink);
    else if (cfg.command == "annulus") manifest.partial = run_annulus(cfg, sink);
    else if (cfg.command == "oracle-check") manifest.partial = run_oracle(cfg, sink);
    else throw std::invalid_argument("run_experiment: unknown command '" + cfg.command + "'");

    std::sort(manifest.files.begin(), manifest.files.end());
    manifest.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    json doc;
    doc["command"] = cfg.command;
    doc["version"] = kVersion;
    doc["config"] = json::parse(config_echo_json(cfg));
    doc["files"] = manifest.files;
    doc["partial"] = manifest.partial;
    doc["seeds"] = {{"master_seed", cfg.master_seed},
                    {"scheme", "keyed 64-bit mix over (master_seed, stream_tag, replica_index)"}};
    doc["wall_ms"] = manifest.wall_ms;  // timing only; excluded from byte comparisons
    {
        std::ofstream out_file(sink.path_for("manifest.json"));
        if (!out_file) throw std::runtime_error("cannot open output file: " + sink.path_for("manifest.json"));
        out_file << doc.dump(2) << '\n';
    }
    return manifest;
}

}  // namespace opcwalk
