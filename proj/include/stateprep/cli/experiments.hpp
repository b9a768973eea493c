#ifndef STATEPREP_CLI_EXPERIMENTS_HPP
#define STATEPREP_CLI_EXPERIMENTS_HPP

// Experiment kinds run by the stateprep tool. Each config is turned into a
// Plan during validation (every library object is built then, so invalid
// input never reaches execution); running a Plan produces a ResultTable
// and a JSON summary.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "table.hpp"

namespace stateprep::cli
{

struct Outcome
{
    ResultTable table;
    json summary;
    std::string line; // one-line human summary
};

struct Plan
{
    std::string kind;
    std::string name;
    std::optional<std::uint64_t> seed;
    json resolved = json::object(); // parameters derived at validation time
    std::function<Outcome(std::uint64_t seed, unsigned threads)> run;
};

inline const std::vector<std::pair<std::string, std::string>> &experiment_kinds()
{
    static const std::vector<std::pair<std::string, std::string>> kinds{
        {"conditional", "conditional density matrix of photon L after a gated trigger on R"},
        {"purity-sweep", "purity of the conditional state across gate durations theta"},
        {"povm-test", "randomized check: pure conditional state iff the POVM factorizes on the support"},
        {"teleport", "Bob's state and teleportation fidelity for one Bell outcome"},
        {"teleport-eigen", "eigenvectors of the teleport operator (spectra that teleport accurately)"},
        {"dephasing", "Bob's state under random input phases, analytic and Monte Carlo"},
        {"beamsplit", "heralded pair from a beam splitter mixing a single photon with one of a pair"},
    };
    return kinds;
}

inline bool is_stochastic(const std::string &kind) { return kind == "povm-test" || kind == "dephasing"; }

// ----- JSON helpers ------------------------------------------------------

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const PolarizationVector &p) { return json{{"plus", to_json(p.plus)}, {"minus", to_json(p.minus)}}; }

inline json to_json(const ThetaInfo &t) { return json{{"value", t.value}, {"regime", to_string(t.regime)}}; }

inline json to_json(const FrequencyGrid &g) { return json{{"k_min", g.k_min()}, {"dk", g.dk()}, {"n", g.size()}}; }

inline json to_json(const Warnings &w) { return json(w); }

inline json window_json(const WindowSpec &w)
{
    json out{{"center", w.window.center}, {"duration", w.window.duration}};
    if (w.theta) {
        out["theta"] = *w.theta;
    }
    return out;
}

// Global phase fixed so the largest component is real and positive.
inline CVector phase_fixed(const CVector &v)
{
    Eigen::Index at = 0;
    v.cwiseAbs().maxCoeff(&at);
    if (std::abs(v(at)) == 0.0) {
        return v;
    }
    return v * (std::conj(v(at)) / std::abs(v(at)));
}

// ----- shared config sections -------------------------------------------

inline std::optional<SpectralVector> read_spectrum_ref(ConfigReader &r,
                                                       const std::map<std::string, FrequencyGrid> &grids,
                                                       const std::string &key)
{
    const json *node = r.child(r.root(), "", key);
    if (node == nullptr) {
        return std::nullopt;
    }
    const auto grid = grid_ref(r, grids, *node, key, "grid");
    if (!grid) {
        return std::nullopt;
    }
    return read_spectrum(r, *grid, *node, key);
}

inline std::optional<PolarizationVector> read_pol_key(ConfigReader &r, const std::string &key, double default_angle)
{
    const json *node = r.child(r.root(), "", key, false);
    if (node == nullptr) {
        return PolarizationVector::linear(default_angle);
    }
    return read_polarization(r, *node, key);
}

inline std::optional<JointSpectralAmplitude> read_jsa_key(ConfigReader &r,
                                                          const std::map<std::string, FrequencyGrid> &grids)
{
    const json *node = r.child(r.root(), "", "jsa");
    if (node == nullptr) {
        return std::nullopt;
    }
    return read_jsa(r, grids, *node, "jsa");
}

struct ConditionalSetup
{
    TwoPhotonState state;
    DetectorResponse trigger;
};

inline std::optional<ConditionalSetup> read_conditional_setup(ConfigReader &r,
                                                              const std::map<std::string, FrequencyGrid> &grids)
{
    const auto jsa = read_jsa_key(r, grids);
    const auto xp = r.complex(r.root(), "", "xi_plus", cplx(1.0));
    const auto xm = r.complex(r.root(), "", "xi_minus", cplx(-1.0));
    const json *trig = r.child(r.root(), "", "trigger");
    std::optional<DetectorResponse> trigger;
    if (trig != nullptr) {
        trigger = read_detector(r, grids, *trig, "trigger");
    }
    if (!jsa || !xp || !xm || !trigger) {
        return std::nullopt;
    }
    if (std::abs(std::abs(*xp) - 1.0) > 1e-9) {
        r.error("xi_plus", "must be a unit-modulus phase");
        return std::nullopt;
    }
    if (std::abs(std::abs(*xm) - 1.0) > 1e-9) {
        r.error("xi_minus", "must be a unit-modulus phase");
        return std::nullopt;
    }
    if (!(trigger->grid() == jsa->grid_a)) {
        r.error("trigger.grid", "the trigger must use the jsa's grid_a (photon R)");
        return std::nullopt;
    }
    auto state = r.guard("jsa", [&] { return TwoPhotonState(*jsa, *xp / std::abs(*xp), *xm / std::abs(*xm)); });
    if (!state) {
        return std::nullopt;
    }
    return ConditionalSetup{*state, *trigger};
}

// jsa, input, input_pol, bell, bell_detector (with its window).
inline std::optional<TeleportScenario> read_teleport_scenario(ConfigReader &r,
                                                              const std::map<std::string, FrequencyGrid> &grids,
                                                              json &resolved)
{
    const auto jsa = read_jsa_key(r, grids);
    const auto input = read_spectrum_ref(r, grids, "input");
    const auto pol = read_pol_key(r, "input_pol", 0.0);
    const auto bell = r.integer(r.root(), "", "bell", 4);
    if (bell && (*bell < 1 || *bell > 4)) {
        r.error("bell", "Bell index must be 1..4");
    }
    const json *det = r.child(r.root(), "", "bell_detector");
    if (!jsa || !input || !pol || !bell || *bell < 1 || *bell > 4 || det == nullptr) {
        return std::nullopt;
    }
    const FrequencyGrid &ga = jsa->grid_a;
    const FrequencyGrid &gc = input->grid;
    if (std::abs(ga.dk() - gc.dk()) > 1e-12 * ga.dk()) {
        r.error("input.grid", "the input grid must share the spacing of jsa.grid_a");
        return std::nullopt;
    }

    const auto shape = r.string(*det, "bell_detector", "shape");
    const auto k0 = r.number(*det, "bell_detector", "k0");
    const auto position = r.number(*det, "bell_detector", "position", 0.0);
    std::optional<CMatrix> response;
    if (shape && k0) {
        if (*shape == "sum-delta") {
            const auto p0 = r.complex(*det, "bell_detector", "p0", cplx(1.0));
            if (p0) {
                try {
                    response = bell_sum_delta_response(ga, gc, *k0, *p0);
                } catch (const DomainError &e) {
                    r.error("bell_detector.k0", e.what());
                }
            }
        } else if (*shape == "sum-gaussian") {
            const auto width = r.positive(*det, "bell_detector", "width");
            if (width) {
                response = bell_sum_gaussian_response(ga, gc, *k0, *width);
            }
        } else {
            r.error("bell_detector.shape", "unknown Bell detector shape '" + *shape + "' (sum-delta | sum-gaussian)");
        }
    }
    const double packet_width = rms_width(ga, jsa->marginal_a()) + rms_width(gc, input->values.cwiseAbs2());
    const json *wnode = r.child(*det, "bell_detector", "window");
    std::optional<WindowSpec> window;
    if (wnode != nullptr) {
        window = read_window(r, *wnode, "bell_detector.window", packet_width);
    }
    if (!response || !window || !position) {
        return std::nullopt;
    }
    resolved["bell_window"] = window_json(*window);
    resolved["packet_width"] = packet_width;
    auto scenario = r.guard("bell_detector", [&] {
        return TeleportScenario(*jsa, *input, *pol, bell_index(static_cast<int>(*bell)),
                                BellDetectorResponse(ga, gc, *response, window->window, *position));
    });
    if (scenario && !(scenario->grid_b() == scenario->grid_c())) {
        r.error("input.grid", "the input grid must equal jsa.grid_b so Bob's spectrum can be compared with it");
        return std::nullopt;
    }
    return scenario;
}

inline std::optional<std::uint64_t> read_seed(ConfigReader &r, const std::string &kind)
{
    const auto seed = r.integer(r.root(), "", "seed", is_stochastic(kind) ? std::nullopt : std::optional<long long>(0));
    if (!seed) {
        return std::nullopt;
    }
    if (*seed < 0) {
        r.error("seed", "must be a non-negative integer");
        return std::nullopt;
    }
    return static_cast<std::uint64_t>(*seed);
}

// ----- per-kind planners --------------------------------------------------

namespace detail
{

inline void plan_conditional(ConfigReader &r, const std::map<std::string, FrequencyGrid> &grids, Plan &plan)
{
    auto setup = read_conditional_setup(r, grids);
    const json *wnode = r.child(r.root(), "", "window");
    if (!setup || wnode == nullptr) {
        return;
    }
    const double width = trigger_packet_width(setup->state);
    const auto window = read_window(r, *wnode, "window", width);
    if (!window) {
        return;
    }
    plan.resolved["window"] = window_json(*window);
    plan.resolved["packet_width"] = width;
    const bool with_long = r.root().value("compare_long_limit", true);
    plan.run = [setup = *setup, window = *window, with_long](std::uint64_t, unsigned) {
        const ConditionalResult res = conditional_density_matrix(setup.state, setup.trigger, window.window);
        const CVector dom = phase_fixed(stateprep::detail::dominant_state(res.rho.values));
        Outcome out;
        out.table.columns = {"index", "K", "population", "dominant_re", "dominant_im"};
        const FrequencyGrid &gl = setup.state.grid_l();
        for (int j = 0; j < gl.size(); ++j) {
            out.table.add_row({static_cast<long long>(j), gl[j], res.rho.values(j, j).real(), dom(j).real(), dom(j).imag()});
        }
        out.summary["purity"] = res.purity;
        out.summary["theta"] = to_json(res.theta);
        out.summary["polarization"] = to_json(res.pol);
        out.summary["pure"] = res.pure_state.has_value();
        if (with_long) {
            const DensityMatrix lim = long_limit_density_matrix(setup.state, setup.trigger);
            out.summary["long_limit_purity"] = purity(lim);
            out.summary["long_limit_max_abs_diff"] = max_abs_diff(res.rho.values, lim.values);
        }
        out.summary["warnings"] = to_json(res.warnings);
        out.line = "purity=" + format_number(res.purity) + " theta=" + format_number(res.theta.value) + " (" +
                   to_string(res.theta.regime) + ")";
        return out;
    };
}

inline void plan_purity_sweep(ConfigReader &r, const std::map<std::string, FrequencyGrid> &grids, Plan &plan)
{
    auto setup = read_conditional_setup(r, grids);
    auto thetas = r.numbers(r.root(), "", "thetas");
    const auto center = r.number(r.root(), "", "window_center", 0.0);
    if (thetas) {
        if (thetas->empty()) {
            r.error("thetas", "must not be empty");
        }
        for (std::size_t i = 0; i < thetas->size(); ++i) {
            if (!((*thetas)[i] > 0.0)) {
                r.error("thetas[" + std::to_string(i) + "]", "must be > 0");
            } else if (i > 0 && !((*thetas)[i] > (*thetas)[i - 1])) {
                r.error("thetas[" + std::to_string(i) + "]", "must be strictly ascending");
            }
        }
    }
    if (!setup || !thetas || !center || !r.ok()) {
        return;
    }
    const double width = trigger_packet_width(setup->state);
    json durations = json::array();
    for (const double t : *thetas) {
        durations.push_back(t / width);
    }
    plan.resolved["packet_width"] = width;
    plan.resolved["durations"] = durations;
    plan.run = [setup = *setup, thetas = *thetas, center = *center](std::uint64_t, unsigned threads) {
        const auto sweep = purity_sweep(setup.state, setup.trigger, center, thetas, threads);
        Outcome out;
        out.table.columns = {"theta", "duration", "purity", "regime"};
        json purities = json::array();
        bool monotone = true;
        for (std::size_t i = 0; i < sweep.size(); ++i) {
            const auto &p = sweep[i];
            out.table.add_row({p.theta, p.duration, p.purity, std::string(to_string(classify_theta(p.theta)))});
            purities.push_back(p.purity);
            if (i > 0 && p.purity > sweep[i - 1].purity + 1e-9) {
                monotone = false;
            }
        }
        const double long_purity = purity(long_limit_density_matrix(setup.state, setup.trigger));
        out.summary["purities"] = purities;
        out.summary["long_limit_purity"] = long_purity;
        out.summary["monotone_non_increasing"] = monotone;
        out.line = "purity " + format_number(sweep.front().purity) + " -> " + format_number(sweep.back().purity) +
                   " (long limit " + format_number(long_purity) + ")";
        return out;
    };
}

inline void plan_povm_test(ConfigReader &r, Plan &plan)
{
    const auto dim = r.integer(r.root(), "", "dim", 4);
    const auto trials = r.integer(r.root(), "", "trials", 1000);
    const auto family = r.string(r.root(), "", "family", std::string("mixed"));
    if (dim && (*dim < 2 || *dim > 64)) {
        r.error("dim", "must lie in 2..64");
    }
    if (trials && (*trials < 1 || *trials > 1000000)) {
        r.error("trials", "must lie in 1..1000000");
    }
    std::optional<PovmFamily> fam;
    if (family) {
        for (const PovmFamily f : {PovmFamily::RankOne, PovmFamily::Projective, PovmFamily::Generic, PovmFamily::Mixed}) {
            if (*family == to_string(f)) {
                fam = f;
            }
        }
        if (!fam) {
            r.error("family", "unknown family '" + *family + "' (rank-1 | projective | generic | mixed)");
        }
    }
    if (!dim || !trials || !fam || !r.ok()) {
        return;
    }
    plan.run = [dim = static_cast<int>(*dim), trials = static_cast<int>(*trials), fam = *fam](std::uint64_t seed,
                                                                                             unsigned) {
        const IffReport rep = purity_iff_factorization_test(trials, dim, seed, fam, true);
        Outcome out;
        out.table.columns = {"trial", "family", "rank", "purity", "defect", "pure", "factorizes"};
        for (std::size_t i = 0; i < rep.details.size(); ++i) {
            const PovmTrial &t = rep.details[i];
            out.table.add_row({static_cast<long long>(i), std::string(to_string(t.family)),
                               static_cast<long long>(t.rank), t.purity, t.defect, static_cast<long long>(t.pure),
                               static_cast<long long>(t.factorizes)});
        }
        out.summary["trials"] = rep.trials;
        out.summary["dim"] = rep.dim;
        out.summary["pure_and_factorizing"] = rep.both_true;
        out.summary["mixed_and_non_factorizing"] = rep.both_false;
        out.summary["counterexamples"] = rep.counterexamples;
        out.summary["redraws"] = rep.redraws;
        out.summary["rank_one_trials"] = rep.rank_one_trials;
        out.summary["projective_trials"] = rep.projective_trials;
        out.summary["generic_trials"] = rep.generic_trials;
        out.summary["worst_pure_margin"] = rep.worst_pure_margin;
        out.summary["worst_mixed_margin"] = rep.worst_mixed_margin;
        out.summary["passed"] = rep.passed();
        out.line = std::to_string(rep.trials) + " trials, " + std::to_string(rep.counterexamples) + " counterexamples";
        return out;
    };
}

inline json teleport_common_summary(const TeleportScenario &s)
{
    json out;
    const auto w = bell_outcome_probabilities(s.input_pol);
    out["bell_weights"] = json::array({w[0], w[1], w[2], w[3]});
    out["bob_polarization"] = to_json(bob_polarization(s));
    out["width_condition_ratio"] = width_condition_ratio(s);
    return out;
}

inline void plan_teleport(ConfigReader &r, const std::map<std::string, FrequencyGrid> &grids, Plan &plan)
{
    auto s = read_teleport_scenario(r, grids, plan.resolved);
    if (!s) {
        return;
    }
    plan.run = [s = *s](std::uint64_t, unsigned) {
        Warnings warnings;
        const DensityMatrix rho = bob_density_matrix(s);
        const double fid = teleportation_fidelity(s);
        const double pur = purity(rho);
        const SpectralVector chi = bob_pure_state(s, &warnings);
        const CVector dom = phase_fixed(stateprep::detail::dominant_state(rho.values));
        Outcome out;
        out.table.columns = {"index", "k_b", "bob_population", "input_population", "dominant_re", "dominant_im"};
        for (int j = 0; j < s.grid_b().size(); ++j) {
            out.table.add_row({static_cast<long long>(j), s.grid_b()[j], rho.values(j, j).real(),
                               std::norm(s.input.values(j)), dom(j).real(), dom(j).imag()});
        }
        out.summary = teleport_common_summary(s);
        out.summary["fidelity"] = fid;
        out.summary["bob_purity"] = pur;
        out.summary["short_gate_overlap"] = std::norm(s.input.values.dot(chi.values));
        out.summary["warnings"] = to_json(warnings);
        out.line = "fidelity=" + format_number(fid) + " bob_purity=" + format_number(pur);
        return out;
    };
}

inline void plan_teleport_eigen(ConfigReader &r, const std::map<std::string, FrequencyGrid> &grids, Plan &plan)
{
    auto s = read_teleport_scenario(r, grids, plan.resolved);
    const auto count = r.integer(r.root(), "", "count", 4);
    if (count && *count < 1) {
        r.error("count", "must be >= 1");
    }
    if (!s || !count || !r.ok()) {
        return;
    }
    plan.run = [s = *s, count = static_cast<int>(*count)](std::uint64_t, unsigned) {
        const auto states = solve_teleportable_states(s, count);
        const double mnorm = spectral_norm(teleport_operator(s));
        Outcome out;
        out.table.columns = {"rank", "eigenvalue_re", "eigenvalue_im", "abs_eigenvalue", "residual", "condition",
                             "fidelity"};
        json eigs = json::array();
        double worst = 0.0;
        for (std::size_t i = 0; i < states.size(); ++i) {
            const auto &st = states[i];
            out.table.add_row({static_cast<long long>(i), st.eigenvalue.real(), st.eigenvalue.imag(),
                               std::abs(st.eigenvalue), st.residual, st.condition, st.fidelity});
            eigs.push_back(json{{"eigenvalue", to_json(st.eigenvalue)},
                                {"residual", st.residual},
                                {"condition", st.condition},
                                {"fidelity", st.fidelity}});
            worst = std::max(worst, st.residual);
        }
        out.summary = teleport_common_summary(s);
        out.summary["operator_norm"] = mnorm;
        out.summary["eigenpairs"] = eigs;
        out.summary["worst_relative_residual"] = mnorm > 0.0 ? worst / mnorm : 0.0;
        out.line = std::to_string(states.size()) + " eigenpairs, top fidelity=" +
                   (states.empty() ? std::string("n/a") : format_number(states.front().fidelity));
        return out;
    };
}

inline void plan_dephasing(ConfigReader &r, const std::map<std::string, FrequencyGrid> &grids, Plan &plan)
{
    auto s = read_teleport_scenario(r, grids, plan.resolved);
    const auto mode_name = r.string(r.root(), "", "mode", std::string("full"));
    const auto samples = r.integer(r.root(), "", "samples", 2000);
    std::optional<DephasingMode> mode;
    if (mode_name) {
        for (const DephasingMode m : {DephasingMode::None, DephasingMode::Global, DephasingMode::Full}) {
            if (*mode_name == to_string(m)) {
                mode = m;
            }
        }
        if (!mode) {
            r.error("mode", "unknown dephasing mode '" + *mode_name + "' (none | global | full)");
        }
    }
    if (samples && (*samples < 1 || *samples > 10000000)) {
        r.error("samples", "must lie in 1..10000000");
    }
    if (!s || !mode || !samples || !r.ok()) {
        return;
    }
    plan.run = [s = *s, mode = *mode, samples = static_cast<int>(*samples)](std::uint64_t seed, unsigned threads) {
        const DephasingResult res = dephased_bob_state(s, mode, samples, seed, threads);
        const DensityMatrix coherent = bob_density_matrix(s);
        Outcome out;
        out.table.columns = {"index", "k_b", "coherent_population", "analytic_population", "monte_carlo_population"};
        for (int j = 0; j < s.grid_b().size(); ++j) {
            out.table.add_row({static_cast<long long>(j), s.grid_b()[j], coherent.values(j, j).real(),
                               res.analytic.values(j, j).real(), res.monte_carlo.values(j, j).real()});
        }
        out.summary = teleport_common_summary(s);
        out.summary["mode"] = to_string(mode);
        out.summary["samples"] = samples;
        out.summary["coherent_purity"] = purity(coherent);
        out.summary["analytic_purity"] = purity(res.analytic);
        out.summary["monte_carlo_purity"] = purity(res.monte_carlo);
        out.summary["max_abs_diff"] = max_abs_diff(res.analytic.values, res.monte_carlo.values);
        out.line = std::string(to_string(mode)) + ": purity " + format_number(purity(coherent)) + " -> " +
                   format_number(purity(res.analytic)) + " (MC " + format_number(purity(res.monte_carlo)) + ")";
        return out;
    };
}

inline void plan_beamsplit(ConfigReader &r, const std::map<std::string, FrequencyGrid> &grids, Plan &plan)
{
    const auto jsa = read_jsa_key(r, grids);
    const auto single = read_spectrum_ref(r, grids, "single");
    const auto pol = read_pol_key(r, "single_pol", 0.0);
    const json *trig = r.child(r.root(), "", "trigger");
    const json *wnode = r.child(r.root(), "", "window");
    std::optional<DetectorResponse> trigger;
    if (trig != nullptr) {
        trigger = read_detector(r, grids, *trig, "trigger");
    }
    std::optional<DetectorResponse> det1;
    std::optional<DetectorResponse> det2;
    const json *d1 = r.child(r.root(), "", "det1", false);
    const json *d2 = r.child(r.root(), "", "det2", false);
    if ((d1 == nullptr) != (d2 == nullptr)) {
        r.error(d1 == nullptr ? "det1" : "det2", "det1 and det2 must be given together");
    }
    if (d1 != nullptr && d2 != nullptr) {
        det1 = read_detector(r, grids, *d1, "det1");
        det2 = read_detector(r, grids, *d2, "det2");
    }
    const auto t1 = r.number(r.root(), "", "t1", 0.0);
    const auto t2 = r.number(r.root(), "", "t2", 0.0);
    if (!jsa || !single || !pol || !trigger || wnode == nullptr || !t1 || !t2) {
        return;
    }
    if (!(trigger->grid() == jsa->grid_a)) {
        r.error("trigger.grid", "the trigger must use the jsa's grid_a");
        return;
    }
    if (!(single->grid == jsa->grid_b)) {
        r.error("single.grid", "the single photon must share the jsa's grid_b to interfere");
        return;
    }
    for (const auto &[det, key] : {std::pair{&det1, "det1.grid"}, std::pair{&det2, "det2.grid"}}) {
        if (*det && !((*det)->grid() == jsa->grid_b)) {
            r.error(key, "output detectors must use the jsa's grid_b");
            return;
        }
    }
    auto s = r.guard("jsa", [&] { return BeamSplitterScenario(*jsa, *single, *pol, *trigger, MeasurementWindow(0.0, 1.0)); });
    if (!s) {
        return;
    }
    const double width = herald_packet_width(*s);
    const auto window = read_window(r, *wnode, "window", width);
    if (!window) {
        return;
    }
    s->window = window->window;
    plan.resolved["window"] = window_json(*window);
    plan.resolved["packet_width"] = width;
    const bool explicit_density = r.root().value("explicit_density", s->grid().size() <= 16);
    plan.run = [s = *s, det1, det2, t1 = *t1, t2 = *t2, explicit_density](std::uint64_t, unsigned) {
        const HeraldedPair pair = heralded_pair_state(s);
        Outcome out;
        out.table.columns = {"component", "weight", "reduced_purity"};
        const std::array<std::pair<const char *, const TwoModeState *>, 3> parts{
            {{"chi12", &pair.chi12}, {"chi11", &pair.chi11}, {"chi22", &pair.chi22}}};
        for (std::size_t i = 0; i < parts.size(); ++i) {
            out.table.add_row({std::string(parts[i].first), pair.weights[i], parts[i].second->reduced_purity()});
        }
        out.summary["weights"] = json::array({pair.weights[0], pair.weights[1], pair.weights[2]});
        out.summary["chi12_reduced_purity"] = pair.chi12.reduced_purity();
        out.summary["pair_overlap"] = pair_overlap(s);
        out.summary["phi_prime"] = to_json(pair.phi_prime);
        out.summary["theta"] = to_json(pair.theta);
        out.summary["heralded_pair_purity"] = heralded_pair_purity(s);
        if (explicit_density) {
            out.summary["heralded_pair_density_purity"] = purity(heralded_pair_density(s, s.grid().size()));
        }
        if (det1 && det2) {
            const TripleCorrelation tc = triple_correlation(s, *det1, *det2, t1, t2);
            out.summary["triple_correlation"] = json{{"total", tc.total},
                                                     {"coincidence", tc.coincidence},
                                                     {"port1", tc.port1},
                                                     {"port2", tc.port2}};
        }
        out.summary["warnings"] = to_json(pair.warnings);
        out.line = "weights " + format_number(pair.weights[0]) + "/" + format_number(pair.weights[1]) + "/" +
                   format_number(pair.weights[2]) + " chi12 reduced purity=" +
                   format_number(pair.chi12.reduced_purity());
        return out;
    };
}

} // namespace detail

// Full validation. Throws ConfigError listing every problem found.
inline Plan plan_experiment(const json &root)
{
    ConfigReader r(root);
    Plan plan;
    if (!root.is_object()) {
        r.error("(root)", "expected a JSON object");
        r.throw_if_failed();
    }
    const auto kind = r.string(root, "", "experiment");
    plan.name = r.string(root, "", "name", std::string("experiment")).value_or("experiment");
    if (plan.name.empty() || plan.name.find_first_of("/\\") != std::string::npos) {
        r.error("name", "must be a non-empty file-name-safe string");
    }
    if (!kind) {
        r.throw_if_failed();
    }
    plan.kind = *kind;
    const auto &kinds = experiment_kinds();
    if (std::none_of(kinds.begin(), kinds.end(), [&](const auto &k) { return k.first == *kind; })) {
        r.error("experiment", "unknown experiment kind '" + *kind + "'");
        r.throw_if_failed();
    }
    plan.seed = read_seed(r, *kind);
    if (root.contains("output")) {
        const json &o = root["output"];
        r.string(o, "output", "csv", std::string());
        r.string(o, "output", "summary", std::string());
    }

    const bool needs_grids = *kind != "povm-test";
    std::map<std::string, FrequencyGrid> grids;
    if (needs_grids) {
        grids = read_grids(r);
    }
    if (*kind == "conditional") {
        detail::plan_conditional(r, grids, plan);
    } else if (*kind == "purity-sweep") {
        detail::plan_purity_sweep(r, grids, plan);
    } else if (*kind == "povm-test") {
        detail::plan_povm_test(r, plan);
    } else if (*kind == "teleport") {
        detail::plan_teleport(r, grids, plan);
    } else if (*kind == "teleport-eigen") {
        detail::plan_teleport_eigen(r, grids, plan);
    } else if (*kind == "dephasing") {
        detail::plan_dephasing(r, grids, plan);
    } else if (*kind == "beamsplit") {
        detail::plan_beamsplit(r, grids, plan);
    }
    if (r.ok() && !plan.run) {
        r.error("(root)", "incomplete configuration");
    }
    r.throw_if_failed();
    return plan;
}

} // namespace stateprep::cli

#endif // STATEPREP_CLI_EXPERIMENTS_HPP
