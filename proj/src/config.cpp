#include "opcwalk/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

namespace opcwalk {

using nlohmann::json;

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"drift",  "clt",     "quenched-clt", "tail",        "mixing",
                                                "pair-tv", "annulus", "oracle-check", "berger"};
    return names;
}

namespace {

// Collects violations as "<json pointer>: message" and offers typed getters
// that fall back to the field's default on error, so one pass reports every
// problem instead of stopping at the first.
struct Validator {
    std::vector<std::string>& errors;

    void fail(const std::string& ptr, const std::string& msg) { errors.push_back(ptr + ": " + msg); }

    void reject_unknown_keys(const json& obj, const std::string& ptr, const std::set<std::string>& allowed) {
        for (const auto& [key, value] : obj.items()) {
            (void)value;
            if (!allowed.count(key)) fail(ptr + "/" + key, "unknown key");
        }
    }

    long long get_int(const json& obj, const std::string& ptr, const std::string& key, long long dflt,
                      long long lo, long long hi) {
        if (!obj.contains(key)) return dflt;
        const json& v = obj.at(key);
        const std::string p = ptr + "/" + key;
        if (!v.is_number_integer() && !v.is_number_unsigned()) {
            fail(p, "expected an integer");
            return dflt;
        }
        const long long x = v.get<long long>();
        if (x < lo || x > hi) {
            fail(p, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            return dflt;
        }
        return x;
    }

    std::uint64_t get_u64(const json& obj, const std::string& ptr, const std::string& key, std::uint64_t dflt) {
        if (!obj.contains(key)) return dflt;
        const json& v = obj.at(key);
        const std::string p = ptr + "/" + key;
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
        fail(p, "expected a non-negative integer");
        return dflt;
    }

    double get_double(const json& obj, const std::string& ptr, const std::string& key, double dflt) {
        if (!obj.contains(key)) return dflt;
        const json& v = obj.at(key);
        if (!v.is_number()) {
            fail(ptr + "/" + key, "expected a number");
            return dflt;
        }
        return v.get<double>();
    }

    bool get_bool(const json& obj, const std::string& ptr, const std::string& key, bool dflt) {
        if (!obj.contains(key)) return dflt;
        const json& v = obj.at(key);
        if (!v.is_boolean()) {
            fail(ptr + "/" + key, "expected a boolean");
            return dflt;
        }
        return v.get<bool>();
    }

    std::string get_enum(const json& obj, const std::string& ptr, const std::string& key, const std::string& dflt,
                         const std::vector<std::string>& allowed) {
        if (!obj.contains(key)) return dflt;
        const json& v = obj.at(key);
        const std::string p = ptr + "/" + key;
        if (!v.is_string()) {
            fail(p, "expected a string");
            return dflt;
        }
        const std::string s = v.get<std::string>();
        if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
            std::string list;
            for (const std::string& a : allowed) list += (list.empty() ? "" : ", ") + a;
            fail(p, "must be one of {" + list + "}");
            return dflt;
        }
        return s;
    }

    std::vector<int> get_int_list(const json& obj, const std::string& ptr, const std::string& key,
                                  std::vector<int> dflt, int lo) {
        if (!obj.contains(key)) return dflt;
        const json& v = obj.at(key);
        const std::string p = ptr + "/" + key;
        if (!v.is_array() || v.empty()) {
            fail(p, "expected a non-empty array of integers");
            return dflt;
        }
        std::vector<int> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const json& e = v[i];
            if (!e.is_number_integer() && !e.is_number_unsigned()) {
                fail(p + "/" + std::to_string(i), "expected an integer");
                return dflt;
            }
            const long long x = e.get<long long>();
            if (x < lo) {
                fail(p + "/" + std::to_string(i), "must be at least " + std::to_string(lo));
                return dflt;
            }
            out.push_back(static_cast<int>(x));
        }
        return out;
    }
};

WeightKind parse_kind(const std::string& s) {
    if (s == "constant") return WeightKind::constant;
    if (s == "iid") return WeightKind::iid;
    if (s == "time_markov") return WeightKind::time_markov;
    if (s == "berger") return WeightKind::berger;
    return WeightKind::m_dependent;
}

std::string kind_name(WeightKind k) { return to_string(k); }

Neighborhood parse_neighborhood(const std::string& s) {
    if (s == "corners") return Neighborhood::corners;
    if (s == "shell") return Neighborhood::shell;
    return Neighborhood::shell_with_self;
}

void parse_lattice(Validator& v, const json& root, LatticeConfig& out) {
    if (!root.contains("lattice")) return;
    const json& obj = root.at("lattice");
    if (!obj.is_object()) {
        v.fail("/lattice", "expected an object");
        return;
    }
    v.reject_unknown_keys(obj, "/lattice", {"d", "p", "horizon", "neighborhood"});
    out.d = static_cast<int>(v.get_int(obj, "/lattice", "d", out.d, 1, kMaxDim));
    const double p = v.get_double(obj, "/lattice", "p", out.p);
    if (!(p > 0.0 && p <= 1.0))
        v.fail("/lattice/p", "must lie in (0, 1]");
    else
        out.p = p;
    out.horizon = static_cast<int>(v.get_int(obj, "/lattice", "horizon", out.horizon, 1, 10000));
    out.neighborhood = parse_neighborhood(
        v.get_enum(obj, "/lattice", "neighborhood", to_string(out.neighborhood), {"corners", "shell", "shell_with_self"}));
}

void parse_weights(Validator& v, const json& root, int d, WeightFieldSpec& out) {
    if (!root.contains("weight_spec")) return;  // default: constant weights
    const json& obj = root.at("weight_spec");
    if (!obj.is_object()) {
        v.fail("/weight_spec", "expected an object");
        return;
    }
    v.reject_unknown_keys(obj, "/weight_spec",
                          {"kind", "constant_value", "iid_lo", "iid_hi", "markov_values", "markov_transition",
                           "markov_stationary", "mdep_radius", "mdep_floor"});
    if (!obj.contains("kind")) {
        v.fail("/weight_spec/kind", "required field is missing");
        return;
    }
    out.kind = parse_kind(
        v.get_enum(obj, "/weight_spec", "kind", "constant", {"constant", "iid", "time_markov", "berger", "m_dependent"}));
    out.constant_value = v.get_double(obj, "/weight_spec", "constant_value", out.constant_value);
    out.iid_lo = v.get_double(obj, "/weight_spec", "iid_lo", out.iid_lo);
    out.iid_hi = v.get_double(obj, "/weight_spec", "iid_hi", out.iid_hi);
    if (obj.contains("markov_values")) {
        const json& mv = obj.at("markov_values");
        if (!mv.is_array() || mv.empty() || !std::all_of(mv.begin(), mv.end(), [](const json& e) { return e.is_number(); }))
            v.fail("/weight_spec/markov_values", "expected a non-empty numeric array");
        else
            out.markov_values = mv.get<std::vector<double>>();
    }
    if (obj.contains("markov_transition")) {
        const json& mt = obj.at("markov_transition");
        bool ok = mt.is_array() && !mt.empty();
        if (ok)
            for (const json& row : mt)
                if (!row.is_array() || row.size() != mt.size() ||
                    !std::all_of(row.begin(), row.end(), [](const json& e) { return e.is_number(); }))
                    ok = false;
        if (!ok)
            v.fail("/weight_spec/markov_transition", "expected a square numeric matrix");
        else
            out.markov_transition = mt.get<std::vector<std::vector<double>>>();
    }
    if (obj.contains("markov_stationary")) {
        const json& ms = obj.at("markov_stationary");
        if (!ms.is_array() || ms.empty() || !std::all_of(ms.begin(), ms.end(), [](const json& e) { return e.is_number(); }))
            v.fail("/weight_spec/markov_stationary", "expected a non-empty numeric array");
        else
            out.markov_stationary = ms.get<std::vector<double>>();
    }
    out.mdep_radius = static_cast<int>(v.get_int(obj, "/weight_spec", "mdep_radius", out.mdep_radius, 1, 16));
    out.mdep_floor = v.get_double(obj, "/weight_spec", "mdep_floor", out.mdep_floor);
    // Semantic checks (positivity, stochastic rows, stationarity) live with
    // the weight module; surface its complaints under this object's pointer.
    for (const std::string& complaint : validate_weight_spec(out, d)) v.fail("/weight_spec", complaint);
}

void parse_regen(Validator& v, const json& root, RegenOptions& out) {
    if (!root.contains("regen")) return;
    const json& obj = root.at("regen");
    if (!obj.is_object()) {
        v.fail("/regen", "expected an object");
        return;
    }
    v.reject_unknown_keys(obj, "/regen", {"step_budget", "scan"});
    out.step_budget = v.get_int(obj, "/regen", "step_budget", out.step_budget, 1, 1ll << 50);
    const std::string scan = v.get_enum(obj, "/regen", "scan", "potential_times", {"potential_times", "every_step"});
    out.scan = scan == "every_step" ? ScanMode::every_step : ScanMode::potential_times;
}

void parse_pair(Validator& v, const json& root, PairTvSettings& out) {
    if (!root.contains("pair")) return;
    const json& obj = root.at("pair");
    if (!obj.is_object()) {
        v.fail("/pair", "expected an object");
        return;
    }
    v.reject_unknown_keys(obj, "/pair", {"separations", "samples", "tau_clip"});
    out.separations = v.get_int_list(obj, "/pair", "separations", out.separations, 0);
    out.samples = static_cast<int>(v.get_int(obj, "/pair", "samples", out.samples, 1000, 100000000));
    out.tau_clip = static_cast<int>(v.get_int(obj, "/pair", "tau_clip", out.tau_clip, 1, 1000000));
}

void parse_annulus(Validator& v, const json& root, int d, AnnulusSettings& out) {
    if (!root.contains("annulus")) return;
    const json& obj = root.at("annulus");
    if (!obj.is_object()) {
        v.fail("/annulus", "expected an object");
        return;
    }
    v.reject_unknown_keys(obj, "/annulus", {"r1", "r", "r2", "samples", "max_skeleton", "sigma"});
    out.r1 = v.get_double(obj, "/annulus", "r1", out.r1);
    out.r = v.get_double(obj, "/annulus", "r", out.r);
    out.r2 = v.get_double(obj, "/annulus", "r2", out.r2);
    out.samples = static_cast<int>(v.get_int(obj, "/annulus", "samples", out.samples, 1, 100000000));
    out.max_skeleton = static_cast<int>(v.get_int(obj, "/annulus", "max_skeleton", out.max_skeleton, 1, 1000000000));
    if (out.r1 < 2) v.fail("/annulus/r1", "inner radius below the lattice resolution (minimum 2)");
    if (!(out.r1 < out.r2)) v.fail("/annulus/r2", "outer radius must exceed the inner radius");
    if (!(out.r >= out.r1 && out.r <= out.r2)) v.fail("/annulus/r", "start radius must lie in [r1, r2]");
    if (obj.contains("sigma")) {
        const json& sg = obj.at("sigma");
        bool ok = sg.is_array() && sg.size() == static_cast<std::size_t>(d);
        if (ok)
            for (const json& row : sg)
                if (!row.is_array() || row.size() != static_cast<std::size_t>(d) ||
                    !std::all_of(row.begin(), row.end(), [](const json& e) { return e.is_number(); }))
                    ok = false;
        if (!ok) {
            v.fail("/annulus/sigma", "expected a " + std::to_string(d) + "x" + std::to_string(d) + " numeric matrix");
        } else {
            out.has_sigma = true;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    out.sigma[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                        sg[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
        }
    }
}

void parse_mixing(Validator& v, const json& root, MixingSettings& out) {
    if (!root.contains("mixing")) return;
    const json& obj = root.at("mixing");
    if (!obj.is_object()) {
        v.fail("/mixing", "expected an object");
        return;
    }
    v.reject_unknown_keys(obj, "/mixing", {"mode", "axis", "gaps"});
    out.mode = v.get_enum(obj, "/mixing", "mode", out.mode, {"alpha", "phi"});
    out.axis = v.get_enum(obj, "/mixing", "axis", out.axis, {"time", "space", "spacetime"});
    out.gaps = v.get_int_list(obj, "/mixing", "gaps", out.gaps, 1);
}

void parse_tail(Validator& v, const json& root, TailSettings& out) {
    if (!root.contains("tail")) return;
    const json& obj = root.at("tail");
    if (!obj.is_object()) {
        v.fail("/tail", "expected an object");
        return;
    }
    v.reject_unknown_keys(obj, "/tail", {"include_pair", "separation"});
    out.include_pair = v.get_bool(obj, "/tail", "include_pair", out.include_pair);
    out.separation = static_cast<int>(v.get_int(obj, "/tail", "separation", out.separation, 0, 1000000));
}

void parse_oracle(Validator& v, const json& root, OracleSettings& out) {
    if (!root.contains("oracle")) return;
    const json& obj = root.at("oracle");
    if (!obj.is_object()) {
        v.fail("/oracle", "expected an object");
        return;
    }
    v.reject_unknown_keys(obj, "/oracle", {"runs"});
    out.runs = static_cast<int>(v.get_int(obj, "/oracle", "runs", out.runs, 1000, 100000000));
}

}  // namespace

ConfigParse validate_config(const std::string& raw, const std::string& command) {
    ConfigParse result;
    Validator v{result.errors};

    if (std::find(command_names().begin(), command_names().end(), command) == command_names().end()) {
        v.fail("/command", "unknown command '" + command + "'");
        return result;
    }
    result.config.command = command;

    json root;
    try {
        root = json::parse(raw);
    } catch (const json::parse_error& e) {
        v.fail("", std::string("not valid JSON: ") + e.what());
        return result;
    }
    if (!root.is_object()) {
        v.fail("", "top level must be a JSON object");
        return result;
    }

    v.reject_unknown_keys(root, "", {"command", "lattice", "weight_spec", "m", "steps", "replicas", "environments",
                                     "master_seed", "output_dir", "threads", "regen", "clt", "pair", "annulus",
                                     "mixing", "tail", "oracle"});

    // The CLI verb is authoritative; a command embedded in the file must agree.
    if (root.contains("command")) {
        const json& c = root.at("command");
        if (!c.is_string() || c.get<std::string>() != command)
            v.fail("/command", "does not match the command-line verb '" + command + "'");
    }

    ExperimentConfig& cfg = result.config;
    parse_lattice(v, root, cfg.lattice);
    try {
        validate_lattice(cfg.lattice);
    } catch (const std::invalid_argument& e) {
        v.fail("/lattice", e.what());
    }
    parse_weights(v, root, cfg.lattice.d, cfg.weight_spec);

    cfg.m = static_cast<int>(v.get_int(root, "", "m", cfg.m, 1, 1000));
    cfg.steps = v.get_int(root, "", "steps", cfg.steps, 1, 1ll << 40);
    cfg.replicas = static_cast<int>(v.get_int(root, "", "replicas", cfg.replicas, 1, 100000000));
    cfg.environments = static_cast<int>(v.get_int(root, "", "environments", cfg.environments, 1, 1000000));
    cfg.master_seed = v.get_u64(root, "", "master_seed", cfg.master_seed);
    cfg.threads = static_cast<int>(v.get_int(root, "", "threads", cfg.threads, 1, 4096));
    if (root.contains("output_dir")) {
        const json& o = root.at("output_dir");
        if (!o.is_string())
            v.fail("/output_dir", "expected a string");
        else
            cfg.output_dir = o.get<std::string>();
    }

    parse_regen(v, root, cfg.regen);
    if (root.contains("clt")) {
        const json& obj = root.at("clt");
        if (!obj.is_object()) {
            v.fail("/clt", "expected an object");
        } else {
            v.reject_unknown_keys(obj, "/clt", {"presteps"});
            cfg.clt_presteps = v.get_int(obj, "/clt", "presteps", cfg.clt_presteps, 0, 1ll << 40);
        }
    }
    parse_pair(v, root, cfg.pair);
    parse_annulus(v, root, cfg.lattice.d, cfg.annulus);
    parse_mixing(v, root, cfg.mixing);
    parse_tail(v, root, cfg.tail);
    parse_oracle(v, root, cfg.oracle);

    // Command-specific requirements.
    if (command == "clt" || command == "quenched-clt") {
        if (cfg.replicas < 100) v.fail("/replicas", "normality reports need at least 100 replicas");
        if (command == "quenched-clt" && cfg.environments < 2)
            v.fail("/environments", "quenched mode compares at least two environments");
    }
    if (command == "tail" && cfg.replicas < 100) v.fail("/replicas", "tail fits need at least 100 samples");
    if (command == "annulus" && cfg.lattice.d < 2)
        v.fail("/lattice/d", "the escape profile is defined for d >= 2");
    if ((command == "drift" || command == "tail" || command == "pair-tv" || command == "annulus") &&
        cfg.lattice.p >= 1.0)
        v.fail("/lattice/p", "regeneration scans require p < 1 (at p = 1 every time is a trivial regeneration)");

    return result;
}

std::string config_echo_json(const ExperimentConfig& cfg) {
    json root;
    root["command"] = cfg.command;
    root["lattice"] = {{"d", cfg.lattice.d},
                       {"p", cfg.lattice.p},
                       {"horizon", cfg.lattice.horizon},
                       {"neighborhood", to_string(cfg.lattice.neighborhood)}};
    root["weight_spec"] = {{"kind", kind_name(cfg.weight_spec.kind)},
                           {"constant_value", cfg.weight_spec.constant_value},
                           {"iid_lo", cfg.weight_spec.iid_lo},
                           {"iid_hi", cfg.weight_spec.iid_hi},
                           {"markov_values", cfg.weight_spec.markov_values},
                           {"markov_transition", cfg.weight_spec.markov_transition},
                           {"markov_stationary", cfg.weight_spec.markov_stationary},
                           {"mdep_radius", cfg.weight_spec.mdep_radius},
                           {"mdep_floor", cfg.weight_spec.mdep_floor}};
    root["m"] = cfg.m;
    root["steps"] = cfg.steps;
    root["replicas"] = cfg.replicas;
    root["environments"] = cfg.environments;
    root["master_seed"] = cfg.master_seed;
    // threads and output_dir are execution details, not experiment inputs:
    // results are independent of both, so the echo omits them.
    root["regen"] = {{"step_budget", cfg.regen.step_budget},
                     {"scan", cfg.regen.scan == ScanMode::every_step ? "every_step" : "potential_times"}};
    root["clt"] = {{"presteps", cfg.clt_presteps}};
    root["pair"] = {{"separations", cfg.pair.separations}, {"samples", cfg.pair.samples}, {"tau_clip", cfg.pair.tau_clip}};
    json annulus = {{"r1", cfg.annulus.r1},
                    {"r", cfg.annulus.r},
                    {"r2", cfg.annulus.r2},
                    {"samples", cfg.annulus.samples},
                    {"max_skeleton", cfg.annulus.max_skeleton}};
    if (cfg.annulus.has_sigma) {
        std::vector<std::vector<double>> sigma;
        for (int i = 0; i < cfg.lattice.d; ++i) {
            std::vector<double> row;
            for (int j = 0; j < cfg.lattice.d; ++j)
                row.push_back(cfg.annulus.sigma[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
            sigma.push_back(row);
        }
        annulus["sigma"] = sigma;
    }
    root["annulus"] = annulus;
    root["mixing"] = {{"mode", cfg.mixing.mode}, {"axis", cfg.mixing.axis}, {"gaps", cfg.mixing.gaps}};
    root["tail"] = {{"include_pair", cfg.tail.include_pair}, {"separation", cfg.tail.separation}};
    root["oracle"] = {{"runs", cfg.oracle.runs}};
    return root.dump(2);
}

}  // namespace opcwalk
