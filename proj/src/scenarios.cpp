#include "toribif/scenarios.hpp"

#include <chrono>
#include <filesystem>
#include <set>

#include "toribif/bubble.hpp"
#include "toribif/csvio.hpp"
#include "toribif/version.hpp"

namespace toribif {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> known_scenarios = {
    "integrate", "sweep1d", "maxmap", "branch", "curve",
    "manifold",  "locate",  "bubble", "drift", "spectrum",
};

// ---------------------------------------------------------------- validation

void need(const json& cfg, const std::string& key, const char* type,
          std::vector<std::string>& out) {
    if (!cfg.contains(key)) {
        out.push_back("missing required option '" + key + "'");
        return;
    }
    const auto& v = cfg.at(key);
    const std::string t = type;
    if (t == "number" && !v.is_number()) out.push_back("'" + key + "' must be a number");
    if (t == "integer" && !v.is_number_integer()) out.push_back("'" + key + "' must be an integer");
    if (t == "object" && !v.is_object()) out.push_back("'" + key + "' must be an object");
    if (t == "string" && !v.is_string()) out.push_back("'" + key + "' must be a string");
    if (t == "array" && !v.is_array()) out.push_back("'" + key + "' must be an array");
}

void check_positive(const json& cfg, const std::string& key, std::vector<std::string>& out) {
    if (cfg.contains(key) && cfg.at(key).is_number() && !(cfg.at(key).get<double>() > 0.0))
        out.push_back("'" + key + "' must be positive");
}

void check_params(const json& cfg, std::vector<std::string>& out, bool need_c = true) {
    if (!cfg.contains("params") || !cfg.at("params").is_object()) {
        out.push_back("missing required option 'params' (object with tau and friends)");
        return;
    }
    const json& p = cfg.at("params");
    if (!p.contains("tau")) out.push_back("params: missing 'tau'");
    else if (!(p.at("tau").is_number() && p.at("tau").get<double>() > 0.0))
        out.push_back("tau must be positive");
    if (p.contains("kappa") && !(p.at("kappa").get<double>() > 0.0))
        out.push_back("kappa must be positive");
    if (p.contains("b") && p.at("b").get<double>() < 0.0) out.push_back("b must be nonnegative");
    if (need_c && p.contains("c") && p.at("c").get<double>() < 0.0)
        out.push_back("c must be nonnegative");
}

void check_history(const json& cfg, std::vector<std::string>& out) {
    if (!cfg.contains("history")) return;  // defaults to constant 0.1
    const json& h = cfg.at("history");
    if (!h.is_object() || !h.contains("kind")) {
        out.push_back("'history' must be an object with a 'kind'");
        return;
    }
    const std::string k = h.at("kind").get<std::string>();
    if (k != "constant" && k != "sinusoid")
        out.push_back("history kind must be 'constant' or 'sinusoid'");
}

std::vector<std::string> validate_impl(const json& cfg) {
    std::vector<std::string> out;
    if (!cfg.is_object()) {
        out.push_back("config must be a JSON object");
        return out;
    }
    if (!cfg.contains("scenario") || !cfg.at("scenario").is_string()) {
        out.push_back("missing 'scenario'");
        return out;
    }
    const std::string sc = cfg.at("scenario").get<std::string>();
    if (!known_scenarios.count(sc)) {
        out.push_back("unknown scenario '" + sc + "'");
        return out;
    }
    check_positive(cfg, "dt", out);

    if (sc == "integrate" || sc == "spectrum") {
        check_params(cfg, out);
        need(cfg, "t_end", "number", out);
        check_positive(cfg, "t_end", out);
        check_history(cfg, out);
        if (sc == "spectrum") {
            need(cfg, "window_years", "number", out);
            check_positive(cfg, "window_years", out);
            if (cfg.contains("window_years") && cfg.contains("t_end") &&
                cfg.at("window_years").is_number() && cfg.at("t_end").is_number() &&
                cfg.at("window_years").get<double>() > cfg.at("t_end").get<double>())
                out.push_back("window_years must not exceed t_end");
        }
    } else if (sc == "sweep1d") {
        check_params(cfg, out, false);
        need(cfg, "c_from", "number", out);
        need(cfg, "c_to", "number", out);
        need(cfg, "n_steps", "integer", out);
        if (cfg.contains("n_steps") && cfg.at("n_steps").is_number_integer() &&
            cfg.at("n_steps").get<int>() < 1)
            out.push_back("n_steps must be at least 1");
        if (cfg.contains("q_max") && cfg.at("q_max").get<int>() < 1)
            out.push_back("q_max must be at least 1");
        check_positive(cfg, "transient", out);
        check_positive(cfg, "window", out);
    } else if (sc == "maxmap") {
        check_params(cfg, out, false);
        for (const char* k : {"tau_from", "tau_to", "c_from", "c_to"}) need(cfg, k, "number", out);
        for (const char* k : {"n_tau", "n_c"}) {
            need(cfg, k, "integer", out);
            if (cfg.contains(k) && cfg.at(k).is_number_integer() && cfg.at(k).get<int>() < 1)
                out.push_back(std::string("'") + k + "' must be at least 1");
        }
        if (cfg.contains("q_max") && cfg.at("q_max").get<int>() < 1)
            out.push_back("q_max must be at least 1");
    } else if (sc == "branch" || sc == "curve" || sc == "manifold" || sc == "locate") {
        check_params(cfg, out);
        need(cfg, "q", "integer", out);
        if (cfg.contains("q") && cfg.at("q").is_number_integer() && cfg.at("q").get<int>() < 1)
            out.push_back("q must be at least 1");
        if (sc == "branch" || sc == "curve") {
            need(cfg, "active", "string", out);
            if (cfg.contains("active")) {
                const std::string a = cfg.at("active").get<std::string>();
                if (a != "c" && a != "tau") out.push_back("active must be 'c' or 'tau'");
            }
            need(cfg, "range", "array", out);
            if (cfg.contains("range") && cfg.at("range").is_array() &&
                cfg.at("range").size() == 2 && cfg.at("range")[0].is_number() &&
                cfg.at("range")[1].is_number() &&
                !(cfg.at("range")[0].get<double>() < cfg.at("range")[1].get<double>()))
                out.push_back("range must be ordered [lo, hi]");
        }
        if (sc == "curve") {
            need(cfg, "kind", "string", out);
            if (cfg.contains("kind")) {
                const std::string k = cfg.at("kind").get<std::string>();
                if (k != "SN" && k != "T" && k != "NP") out.push_back("curve kind must be SN, T or NP");
            }
            need(cfg, "window", "object", out);
        }
        if (sc == "manifold") {
            if (cfg.contains("sign")) {
                const int s = cfg.at("sign").get<int>();
                if (s != 1 && s != -1) out.push_back("sign must be +1 or -1");
            }
            check_positive(cfg, "eps", out);
        }
        if (sc == "locate") {
            need(cfg, "kind", "string", out);
            if (cfg.contains("kind")) {
                const std::string k = cfg.at("kind").get<std::string>();
                if (k != "HoC" && k != "HeC" && k != "SNT")
                    out.push_back("locate kind must be HoC, HeC or SNT");
            }
            need(cfg, "scan", "array", out);
        }
    } else if (sc == "bubble") {
        need(cfg, "window", "object", out);
        if (cfg.contains("window") && cfg.at("window").is_object()) {
            for (const char* k : {"tau", "c"}) {
                if (!cfg.at("window").contains(k)) out.push_back(std::string("window: missing '") + k + "'");
            }
        }
    } else if (sc == "drift") {
        check_params(cfg, out, false);
        need(cfg, "ramp", "object", out);
        if (cfg.contains("ramp") && cfg.at("ramp").is_object()) {
            const json& r = cfg.at("ramp");
            for (const char* k : {"c_start", "c_end", "t_start", "t_end"}) {
                if (!r.contains(k)) out.push_back(std::string("ramp: missing '") + k + "'");
            }
            if (r.contains("t_start") && r.contains("t_end") &&
                !(r.at("t_start").get<double>() < r.at("t_end").get<double>()))
                out.push_back("ramp: t_end must exceed t_start");
        }
        need(cfg, "t_end", "number", out);
        check_positive(cfg, "t_end", out);
        check_positive(cfg, "sample_dt", out);
    }
    return out;
}

// ---------------------------------------------------------------- helpers

ModelParams params_from(const json& cfg) {
    ModelParams p;
    if (cfg.contains("params")) {
        const json& j = cfg.at("params");
        p.b = j.value("b", 1.0);
        p.kappa = j.value("kappa", 11.0);
        p.c = j.value("c", 0.0);
        p.tau = j.value("tau", 0.9395);
    }
    return p;
}

HistorySegment history_from(const json& cfg, double tau, double dt) {
    if (!cfg.contains("history")) return make_constant_history(0.1, tau, dt);
    const json& h = cfg.at("history");
    const std::string kind = h.at("kind").get<std::string>();
    if (kind == "constant") return make_constant_history(h.value("value", 0.1), tau, dt);
    return make_sinusoid_history(h.value("amplitude", 0.1), tau, dt);
}

SweepOptions sweep_options_from(const json& cfg, const ModelParams& p) {
    SweepOptions so;
    so.b = p.b;
    so.kappa = p.kappa;
    so.dt = cfg.value("dt", 1e-3);
    so.transient = cfg.value("transient", 500.0);
    so.window = cfg.value("window", 500.0);
    so.seed_value = cfg.value("seed_value", 0.1);
    so.classify.eps_lock = cfg.value("eps_lock", 1e-6);
    so.classify.q_max = cfg.value("q_max", 64);
    return so;
}

void write_orbit_files(const PeriodicOrbit& orb, const FloquetSpectrum& spec,
                       const std::string& stem, std::vector<std::string>& outputs) {
    {
        CsvWriter csv(stem + ".csv", {"t", "h"});
        const long n = std::lround(orb.q / 1e-3);
        for (long i = 0; i <= n; ++i) {
            const double t = static_cast<double>(i) * 1e-3;
            csv.field(t);
            csv.field(orb.eval(t));
            csv.endrow();
        }
        outputs.push_back(stem + ".csv");
    }
    json side;
    side["q"] = orb.q;
    side["params"] = {{"b", orb.params.b}, {"kappa", orb.params.kappa},
                      {"c", orb.params.c}, {"tau", orb.params.tau}};
    side["residual_norm"] = orb.residual_norm;
    side["class"] = spec.class_name();
    side["multipliers"] = json::array();
    for (const auto& mu : spec.multipliers)
        side["multipliers"].push_back({{"re", mu.real()}, {"im", mu.imag()}});
    std::ofstream out(stem + ".json", std::ios::binary);
    out << side.dump(2) << "\n";
    outputs.push_back(stem + ".json");
}

void write_branch_csv(const Branch& br, const std::string& path,
                      std::vector<std::string>& outputs) {
    CsvWriter csv(path, {"param", "max_h", "n_unstable", "mu1_re", "mu1_im", "mu2_re", "mu2_im"});
    for (const auto& bp : br.points) {
        csv.field(bp.param);
        csv.field(bp.orbit.max_h());
        csv.field(bp.spec.n_unstable);
        const auto& mus = bp.spec.multipliers;
        csv.field(mus.size() > 0 ? mus[0].real() : 0.0);
        csv.field(mus.size() > 0 ? mus[0].imag() : 0.0);
        csv.field(mus.size() > 1 ? mus[1].real() : 0.0);
        csv.field(mus.size() > 1 ? mus[1].imag() : 0.0);
        csv.endrow();
    }
    outputs.push_back(path);
}

json events_json(const Branch& br) {
    json evs = json::array();
    for (const auto& ev : br.events) {
        json e;
        e["kind"] = event_name(ev.kind);
        e["tau"] = ev.tau;
        e["c"] = ev.c;
        e["param"] = ev.param;
        e["test_value"] = ev.test_value;
        json mus = json::array();
        for (size_t i = 0; i < std::min<size_t>(6, ev.multipliers.size()); ++i)
            mus.push_back({{"re", ev.multipliers[i].real()}, {"im", ev.multipliers[i].imag()}});
        e["leading_multipliers"] = mus;
        evs.push_back(e);
    }
    return evs;
}

void write_curve_csv(const std::vector<const Codim1Curve*>& curves, const std::string& path,
                     std::vector<std::string>& outputs) {
    CsvWriter csv(path, {"tau", "c", "kind"});
    for (const Codim1Curve* cu : curves)
        for (const auto& p : cu->pts) {
            csv.field(p[0]);
            csv.field(p[1]);
            csv.field(std::string(curve_name(cu->kind)));
            csv.endrow();
        }
    outputs.push_back(path);
}

void write_locus_csv(const std::vector<const TransitionLocus*>& loci, const std::string& path,
                     std::vector<std::string>& outputs) {
    CsvWriter csv(path, {"tau", "c", "kind", "bracket_width"});
    for (const TransitionLocus* l : loci)
        for (const auto& p : l->points) {
            csv.field(p.tau);
            csv.field(p.c);
            csv.field(std::string(transition_name(p.kind)));
            csv.field(p.bracket_hi - p.bracket_lo);
            csv.endrow();
        }
    outputs.push_back(path);
}

// branch bootstrap shared by branch/curve/manifold/locate scenarios
PeriodicOrbit scenario_anchor_orbit(const json& cfg, const ModelParams& p, int q, double dt) {
    double c_from = p.c - 0.027, c_to = p.c;
    int steps = 7;
    if (cfg.contains("bootstrap")) {
        const json& b = cfg.at("bootstrap");
        c_from = b.value("c_from", c_from);
        c_to = b.value("c_to", c_to);
        steps = b.value("steps", steps);
    }
    PeriodicOrbit orb = bootstrap_locked_orbit(p.tau, c_from, c_to, steps, q, dt);
    orb.params.b = p.b;
    orb.params.kappa = p.kappa;
    return orb;
}

// ---------------------------------------------------------------- scenarios

void run_integrate(const json& cfg, const fs::path& dir, std::vector<std::string>& outputs,
                   bool spectrum_mode) {
    const ModelParams p = params_from(cfg);
    const double dt = cfg.value("dt", 1e-3);
    HistorySegment h = history_from(cfg, p.tau, dt);
    const Trajectory traj = integrate(h, h.t0 + cfg.at("t_end").get<double>(), p);
    if (!spectrum_mode) {
        CsvWriter csv((dir / "trajectory.csv").string(), {"t", "h", "hdot"});
        for (size_t i = 0; i < traj.h.size(); ++i) {
            csv.field(traj.t_start + traj.dt * static_cast<double>(i));
            csv.field(traj.h[i]);
            csv.field(traj.hdot[i]);
            csv.endrow();
        }
        outputs.push_back((dir / "trajectory.csv").string());
    } else {
        const auto spec = power_spectrum(traj, cfg.at("window_years").get<double>());
        CsvWriter csv((dir / "spectrum.csv").string(), {"freq", "log_power"});
        for (const auto& row : spec) {
            csv.field(row[0]);
            csv.field(row[1]);
            csv.endrow();
        }
        outputs.push_back((dir / "spectrum.csv").string());
    }
}

void write_sweep_csv(const std::vector<SweepPoint>& pts, double tau, const std::string& path,
                     std::vector<std::string>& outputs) {
    CsvWriter csv(path, {"tau", "c", "max_h", "kind", "p", "q"});
    for (const auto& spt : pts) {
        csv.field(tau);
        csv.field(spt.c);
        csv.field(spt.cls.max_h);
        csv.field(spt.cls.kind_name());
        csv.field(spt.cls.p);
        csv.field(spt.cls.q);
        csv.endrow();
    }
    outputs.push_back(path);
}

void run_sweep1d(const json& cfg, const fs::path& dir, std::vector<std::string>& outputs) {
    const ModelParams p = params_from(cfg);
    const SweepOptions so = sweep_options_from(cfg, p);
    const double c0 = cfg.at("c_from").get<double>(), c1 = cfg.at("c_to").get<double>();
    const int n = cfg.at("n_steps").get<int>();
    std::vector<std::string> dirs = cfg.value("directions", std::vector<std::string>{"up", "down"});
    for (const std::string& d : dirs) {
        const bool up = d == "up";
        const auto pts = sweep_column(p.tau, up ? c0 : c1, up ? c1 : c0, n, so);
        write_sweep_csv(pts, p.tau, (dir / ("sweep_" + d + ".csv")).string(), outputs);
    }
}

void run_maxmap(const json& cfg, const fs::path& dir, std::vector<std::string>& outputs,
                int workers) {
    const ModelParams p = params_from(cfg);
    const SweepOptions so = sweep_options_from(cfg, p);
    MaxMapGrid grid;
    grid.tau_from = cfg.at("tau_from").get<double>();
    grid.tau_to = cfg.at("tau_to").get<double>();
    grid.n_tau = cfg.at("n_tau").get<int>();
    grid.c_from = cfg.at("c_from").get<double>();
    grid.c_to = cfg.at("c_to").get<double>();
    grid.n_c = cfg.at("n_c").get<int>();
    const std::string d = cfg.value("direction", "both");

    CsvWriter csv((dir / "maxmap.csv").string(), {"tau", "c", "direction", "max_h", "kind", "p", "q"});
    for (const std::string dd : d == "both" ? std::vector<std::string>{"up", "down"}
                                            : std::vector<std::string>{d}) {
        const MaxMap m = max_map(grid, dd == "up" ? MaxMap::Direction::up : MaxMap::Direction::down,
                                 so, workers);
        for (const auto& cell : m.cells) {
            csv.field(cell.tau);
            csv.field(cell.c);
            csv.field(dd);
            csv.field(cell.cls.max_h);
            csv.field(cell.cls.kind_name());
            csv.field(cell.cls.p);
            csv.field(cell.cls.q);
            csv.endrow();
        }
    }
    outputs.push_back((dir / "maxmap.csv").string());
}

void run_branch(const json& cfg, const fs::path& dir, std::vector<std::string>& outputs) {
    const ModelParams p = params_from(cfg);
    const double dt = cfg.value("dt", 1e-3);
    const int q = cfg.at("q").get<int>();
    const PeriodicOrbit start = scenario_anchor_orbit(cfg, p, q, dt);
    ContinuationOptions co;
    co.max_step = cfg.value("max_step", 1e-2);
    co.max_points = cfg.value("max_points", 600);
    const ActiveParam ap = cfg.at("active").get<std::string>() == "c" ? ActiveParam::c : ActiveParam::tau;
    const Branch br = continue_branch(start, ap, cfg.at("range")[0].get<double>(),
                                      cfg.at("range")[1].get<double>(), co);
    write_branch_csv(br, (dir / "branch.csv").string(), outputs);
    write_orbit_files(br.points.front().orbit, br.points.front().spec,
                      (dir / "orbit_start").string(), outputs);
    std::ofstream out(dir / "events.json", std::ios::binary);
    out << events_json(br).dump(2) << "\n";
    outputs.push_back((dir / "events.json").string());
}

void run_curve(const json& cfg, const fs::path& dir, std::vector<std::string>& outputs) {
    const ModelParams p = params_from(cfg);
    const double dt = cfg.value("dt", 1e-3);
    const int q = cfg.at("q").get<int>();
    const PeriodicOrbit start = scenario_anchor_orbit(cfg, p, q, dt);
    ContinuationOptions co;
    co.max_step = cfg.value("max_step", 1e-2);
    const ActiveParam ap = cfg.at("active").get<std::string>() == "c" ? ActiveParam::c : ActiveParam::tau;
    const Branch br = continue_branch(start, ap, cfg.at("range")[0].get<double>(),
                                      cfg.at("range")[1].get<double>(), co);
    const std::string kind_s = cfg.at("kind").get<std::string>();
    const CurveKind kind = kind_s == "SN" ? CurveKind::SN : kind_s == "T" ? CurveKind::T : CurveKind::NP;
    const EventKind ek = kind_s == "SN" ? EventKind::SN : kind_s == "T" ? EventKind::T : EventKind::NP;
    const BifurcationEvent* seed = nullptr;
    for (const auto& ev : br.events)
        if (ev.kind == ek && !seed) seed = &ev;
    if (!seed) throw Error("curve scenario: no seed event of the requested kind on the branch");
    CurveOptions cuo;
    const json& w = cfg.at("window");
    cuo.tau_window = {w.at("tau")[0].get<double>(), w.at("tau")[1].get<double>()};
    cuo.c_window = {w.at("c")[0].get<double>(), w.at("c")[1].get<double>()};
    cuo.march_axis = cfg.value("march_axis", kind == CurveKind::SN ? 0 : 1);
    const Codim1Curve curve = trace_codim1(kind, *seed, cuo);
    write_curve_csv({&curve}, (dir / "curve.csv").string(), outputs);
}

void run_manifold(const json& cfg, const fs::path& dir, std::vector<std::string>& outputs,
                  int workers) {
    const ModelParams p = params_from(cfg);
    const double dt = cfg.value("dt", 1e-3);
    const int q = cfg.at("q").get<int>();
    // anchor inside the locked region, then move to the requested point
    json anchor_cfg = cfg;
    ModelParams pa = p;
    if (cfg.contains("anchor")) {
        pa.tau = cfg.at("anchor").value("tau", p.tau);
        pa.c = cfg.at("anchor").value("c", p.c);
    }
    const PeriodicOrbit stable = scenario_anchor_orbit(anchor_cfg, pa, q, dt);
    ContinuationOptions co;
    Branch cb = continue_branch(stable, ActiveParam::c, pa.c - 0.02, pa.c + 0.02, co);
    const BranchPoint* sad = nullptr;
    for (const auto& bp : cb.points)
        if (bp.spec.cls == FloquetSpectrum::Class::saddle1 &&
            (!sad || std::fabs(bp.param - pa.c) < std::fabs(sad->param - pa.c)))
            sad = &bp;
    if (!sad) throw Error("manifold scenario: no 1-saddle on the local branch");
    BubbleObjects objs(stable, sad->orbit);
    auto loc = objs.at(p.tau, p.c);

    ManifoldOptions mo;
    mo.eps_rel = cfg.value("eps", 1e-4);
    mo.n_seeds = cfg.value("n_seeds", 50);
    mo.n_iters = cfg.value("n_iters", 100);
    mo.dt_target = dt;
    mo.workers = workers;
    const int sign = cfg.value("sign", +1);
    const ManifoldTrace tr = trace_manifold(loc.saddle, sign, loc.ctx, mo);

    CsvWriter csv((dir / "manifold.csv").string(), {"seed_id", "iter", "h", "h_delayed", "destination"});
    for (size_t s = 0; s < tr.iterates.size(); ++s) {
        const std::string dest = destination_name(tr.destinations[s]);
        for (size_t it = 0; it < tr.iterates[s].size(); ++it) {
            csv.field(static_cast<int>(s));
            csv.field(static_cast<int>(it));
            csv.field(tr.iterates[s][it][0]);
            csv.field(tr.iterates[s][it][1]);
            csv.field(dest);
            csv.endrow();
        }
    }
    outputs.push_back((dir / "manifold.csv").string());
}

void run_locate(const json& cfg, const fs::path& dir, std::vector<std::string>& outputs) {
    const ModelParams p = params_from(cfg);
    const double dt = cfg.value("dt", 1e-3);
    const std::string kind = cfg.at("kind").get<std::string>();
    const double lo = cfg.at("scan")[0].get<double>(), hi = cfg.at("scan")[1].get<double>();
    TransitionOptions to;
    to.refine_tol = cfg.value("refine_tol", 1e-4);
    to.dt = dt;
    to.b = p.b;
    to.kappa = p.kappa;

    TransitionPoint pt;
    if (kind == "SNT") {
        const bool down = cfg.value("rider", "cold_up") == "cold_down";
        pt = locate_snt(p.tau, down ? hi : lo, down ? lo : hi, nullptr, to);
    } else {
        const int q = cfg.at("q").get<int>();
        json anchor_cfg = cfg;
        ModelParams pa = p;
        if (cfg.contains("anchor")) {
            pa.tau = cfg.at("anchor").value("tau", p.tau);
            pa.c = cfg.at("anchor").value("c", p.c);
        }
        const PeriodicOrbit stable = scenario_anchor_orbit(anchor_cfg, pa, q, dt);
        ContinuationOptions co;
        Branch cb = continue_branch(stable, ActiveParam::c, pa.c - 0.02, pa.c + 0.02, co);
        const BranchPoint* sad = nullptr;
        for (const auto& bp : cb.points)
            if (bp.spec.cls == FloquetSpectrum::Class::saddle1 &&
                (!sad || std::fabs(bp.param - pa.c) < std::fabs(sad->param - pa.c)))
            sad = &bp;
        if (!sad) throw Error("locate scenario: no 1-saddle on the local branch");
        BubbleObjects objs(stable, sad->orbit);
        to.man.n_seeds = cfg.value("n_seeds", 24);
        to.man.n_iters = cfg.value("n_iters", 90);
        if (kind == "HoC") pt = locate_hoc(objs, p.c, lo, hi, to);
        else pt = locate_hec(objs, p.tau, lo, hi, cfg.value("branch_sign", +1), to);
    }
    TransitionLocus l;
    l.kind = pt.kind;
    l.points.push_back(pt);
    write_locus_csv({&l}, (dir / "locus.csv").string(), outputs);
    json j;
    j["kind"] = transition_name(pt.kind);
    j["tau"] = pt.tau;
    j["c"] = pt.c;
    j["bracket"] = {pt.bracket_lo, pt.bracket_hi};
    j["before"] = pt.before_sig;
    j["after"] = pt.after_sig;
    std::ofstream out(dir / "locate.json", std::ios::binary);
    out << j.dump(2) << "\n";
    outputs.push_back((dir / "locate.json").string());
}

void run_bubble(const json& cfg, const fs::path& dir, std::vector<std::string>& outputs,
                int workers) {
    BubbleConfig bc;
    const json& w = cfg.at("window");
    bc.tau_window = {w.at("tau")[0].get<double>(), w.at("tau")[1].get<double>()};
    bc.c_window = {w.at("c")[0].get<double>(), w.at("c")[1].get<double>()};
    bc.anchor_tau = cfg.value("anchor_tau", 0.9530);
    bc.anchor_c = cfg.value("anchor_c", 2.9850);
    bc.workers = workers;
    bc.hoc_slices = cfg.value("hoc_slices", 5);
    bc.hec_slices = cfg.value("hec_slices", 7);
    bc.snt_slices = cfg.value("snt_slices", 7);
    bc.probe_seeds = cfg.value("probe_seeds", 24);
    bc.probe_iters = cfg.value("probe_iters", 90);
    bc.verbose = cfg.value("verbose", true);
    const BubbleSet bs = build_bubble(bc);

    write_curve_csv({&bs.sn_low, &bs.sn_high}, (dir / "sn.csv").string(), outputs);
    write_curve_csv({&bs.t_curve}, (dir / "t.csv").string(), outputs);
    write_curve_csv({&bs.np_curve}, (dir / "np.csv").string(), outputs);
    write_locus_csv({&bs.hoc}, (dir / "hoc.csv").string(), outputs);
    write_locus_csv({&bs.hec_plus, &bs.hec_minus}, (dir / "hec.csv").string(), outputs);
    write_locus_csv({&bs.snt_up, &bs.snt_down}, (dir / "snt.csv").string(), outputs);

    json pts;
    auto arr = [](const std::vector<std::array<double, 2>>& v) {
        json a = json::array();
        for (const auto& p : v) a.push_back({{"tau", p[0]}, {"c", p[1]}});
        return a;
    };
    pts["B"] = arr(bs.points.B);
    pts["Z"] = arr(bs.points.Z);
    pts["K"] = arr(bs.points.K);
    if (bs.points.N) pts["N"] = {{"tau", (*bs.points.N)[0]}, {"c", (*bs.points.N)[1]}};
    if (bs.points.X) pts["X"] = {{"tau", (*bs.points.X)[0]}, {"c", (*bs.points.X)[1]}};
    std::ofstream out(dir / "points.json", std::ios::binary);
    out << pts.dump(2) << "\n";
    outputs.push_back((dir / "points.json").string());
}

void run_drift(const json& cfg, const fs::path& dir, std::vector<std::string>& outputs) {
    ModelParams p = params_from(cfg);
    const double dt = cfg.value("dt", 1e-3);
    const json& r = cfg.at("ramp");
    RampSpec ramp{r.at("c_start").get<double>(), r.at("c_end").get<double>(),
                  r.at("t_start").get<double>(), r.at("t_end").get<double>()};
    p.c = ramp.c_start;

    HistorySegment h = history_from(cfg, p.tau, dt);
    const double settle = cfg.value("settle_years", 200.0);
    if (settle > 0.0) {
        ModelParams p0 = p;
        Trajectory warm = integrate(h, h.t0 + settle, p0);
        h = history_from_trajectory_tail(warm);
        h.t0 = 0.0;  // the ramp clock starts after the settle
    }

    std::vector<std::pair<std::string, double>> event_cs;
    if (cfg.contains("events_c"))
        for (const auto& [name, v] : cfg.at("events_c").items())
            event_cs.emplace_back(name, v.get<double>());

    const DriftResult dr = drift_run(p, ramp, h, cfg.at("t_end").get<double>(), event_cs);

    const double sample_dt = cfg.value("sample_dt", 0.05);
    CsvWriter csv((dir / "drift.csv").string(), {"t", "c", "h", "year_max"});
    const double t0 = dr.traj.t0();
    for (double t = t0; t <= dr.traj.t_end() + 1e-9; t += sample_dt) {
        if (t > dr.traj.t_end()) break;
        const size_t yi = std::min(dr.year_max.size() - 1,
                                   static_cast<size_t>(std::max(0.0, std::floor(t - t0))));
        csv.field(t);
        csv.field(dr.ramp.c_at(t));
        csv.field(dr.traj.eval(t));
        csv.field(dr.year_max.empty() ? 0.0 : dr.year_max[yi][1]);
        csv.endrow();
    }
    outputs.push_back((dir / "drift.csv").string());

    json j;
    j["collapse_time"] = collapse_time(dr);
    json evs = json::array();
    for (const auto& [name, t] : dr.event_times) evs.push_back({{"name", name}, {"t", t}});
    j["events"] = evs;
    std::ofstream out(dir / "events.json", std::ios::binary);
    out << j.dump(2) << "\n";
    outputs.push_back((dir / "events.json").string());
}

} // namespace

std::vector<std::string> validate_scenario(const json& cfg) { return validate_impl(cfg); }

std::vector<std::string> run_scenario(const json& cfg, const std::string& out_dir, int workers) {
    const auto t_begin = std::chrono::steady_clock::now();
    const fs::path dir(out_dir.empty() ? "." : out_dir);
    fs::create_directories(dir);

    std::vector<std::string> outputs;
    const std::string sc = cfg.at("scenario").get<std::string>();
    if (sc == "integrate") run_integrate(cfg, dir, outputs, false);
    else if (sc == "spectrum") run_integrate(cfg, dir, outputs, true);
    else if (sc == "sweep1d") run_sweep1d(cfg, dir, outputs);
    else if (sc == "maxmap") run_maxmap(cfg, dir, outputs, workers);
    else if (sc == "branch") run_branch(cfg, dir, outputs);
    else if (sc == "curve") run_curve(cfg, dir, outputs);
    else if (sc == "manifold") run_manifold(cfg, dir, outputs, workers);
    else if (sc == "locate") run_locate(cfg, dir, outputs);
    else if (sc == "bubble") run_bubble(cfg, dir, outputs, workers);
    else if (sc == "drift") run_drift(cfg, dir, outputs);
    else throw Error("unknown scenario " + sc);

    // manifest, written atomically
    json man;
    man["tool"] = "toribif";
    man["version"] = TORIBIF_VERSION;
    man["config"] = cfg;
    man["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    json outs = json::array();
    for (const auto& f : outputs) {
        json o;
        o["file"] = fs::path(f).filename().string();
        o["bytes"] = static_cast<uint64_t>(fs::file_size(f));
        char hex[20];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(fnv1a64_file(f)));
        o["fnv1a64"] = hex;
        outs.push_back(o);
    }
    man["outputs"] = outs;
    const fs::path tmp = dir / "run_manifest.json.tmp";
    const fs::path fin = dir / "run_manifest.json";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << man.dump(2) << "\n";
    }
    fs::rename(tmp, fin);
    outputs.push_back(fin.string());
    return outputs;
}

} // namespace toribif
