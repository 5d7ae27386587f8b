// kpo — command-line front end: every analysis as a subcommand emitting
// plot-ready data. No numerics live here; subcommands are thin compositions
// of library calls.
//
// Exit codes: 0 success, 1 invalid arguments, 2 convergence/solver failure,
// 3 I/O failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kpo/classical.hpp"
#include "kpo/errors.hpp"
#include "kpo/model.hpp"
#include "kpo/observables.hpp"
#include "kpo/sweep.hpp"
#include "kpo/tridiag_eigen.hpp"
#include "kpo/version.hpp"
#include "kpo/wigner.hpp"

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct OutputTarget {
    std::string path;  // empty = stdout

    void write(const std::string& text) const {
        if (path.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream out(path, std::ios::binary);
        if (!out) throw kpo::io_error(path, "cannot open for writing");
        out << text;
        if (!out) throw kpo::io_error(path, "write failed");
    }
};

// Resolved-configuration echo, printed to stderr before any computation.
void echo_config(const std::string& sub,
                 const std::vector<std::pair<std::string, std::string>>& kv) {
    std::cerr << "# " << sub;
    for (const auto& [k, v] : kv) std::cerr << ' ' << k << '=' << v;
    std::cerr << '\n';
}

double resolve_delta_over_k(const std::optional<double>& over_k,
                            const std::optional<double>& over_dc, double p0_over_k) {
    if (over_k.has_value() == over_dc.has_value()) {
        throw CLI::ValidationError(
            "give exactly one of --delta-over-k / --delta-over-dc");
    }
    if (over_k) return *over_k;
    if (p0_over_k <= 0.0) {
        throw CLI::ValidationError("--delta-over-dc is undefined at P0/K = 0");
    }
    return *over_dc * kpo::critical_detuning(kpo::ModelParams(0.0, 1.0, p0_over_k));
}

std::pair<double, double> parse_range(const std::string& s) {
    double lo, hi;
    char colon;
    std::istringstream in(s);
    if (!(in >> lo >> colon >> hi) || colon != ':') {
        throw CLI::ValidationError("expected lo:hi, got '" + s + "'");
    }
    return {lo, hi};
}

struct DeltaScan {
    double lo, hi;
    std::size_t steps;
};

DeltaScan parse_scan(const std::string& s) {
    DeltaScan r;
    char c1, c2;
    std::istringstream in(s);
    if (!(in >> r.lo >> c1 >> r.hi >> c2 >> r.steps) || c1 != ':' || c2 != ':') {
        throw CLI::ValidationError("expected lo:hi:steps, got '" + s + "'");
    }
    return r;
}

// ----------------------------- subcommand bodies -----------------------------

int run_spectrum(double p0_over_k, double delta_over_k, std::size_t states,
                 double tol, double kerr, const std::string& format,
                 const OutputTarget& out) {
    echo_config("spectrum", {{"p0_over_k", fmt(p0_over_k)},
                             {"delta_over_k", fmt(delta_over_k)},
                             {"states", std::to_string(states)},
                             {"tol", fmt(tol)},
                             {"kerr", fmt(kerr)},
                             {"format", format}});
    const kpo::ModelParams params(delta_over_k, 1.0, p0_over_k);
    const auto spec = kpo::converged_spectrum(params, states, tol);
    const auto pairs = p0_over_k == 0.0
                           ? kpo::degenerate_pairs_analytic(delta_over_k)
                           : std::vector<std::pair<std::size_t, std::size_t>>{};

    if (format == "json") {
        json j;
        j["n_max"] = spec.n_max;
        j["converged_count"] = spec.converged_count;
        std::vector<double> energies;
        for (std::size_t i = 0; i < states; ++i) energies.push_back(spec.energies[i] * kerr);
        j["energies"] = energies;
        if (!pairs.empty()) {
            json pj = json::array();
            for (const auto& [a, b] : pairs) pj.push_back({a, b});
            j["degenerate_pairs"] = pj;
        }
        out.write(j.dump(2) + "\n");
        return 0;
    }
    std::ostringstream text;
    text << "index,energy\n";
    for (std::size_t i = 0; i < states; ++i) {
        text << i << ',' << fmt(spec.energies[i] * kerr) << '\n';
    }
    if (!pairs.empty()) {
        text << "degenerate_pairs:";
        for (const auto& [a, b] : pairs) text << " (" << a << ',' << b << ')';
        text << '\n';
    }
    out.write(text.str());
    return 0;
}

int run_qfi(double p0_over_k, double delta_over_k, std::size_t states, double tol,
            double kerr, const std::string& format, const OutputTarget& out) {
    echo_config("qfi", {{"p0_over_k", fmt(p0_over_k)},
                        {"delta_over_k", fmt(delta_over_k)},
                        {"states", std::to_string(states)},
                        {"tol", fmt(tol)},
                        {"kerr", fmt(kerr)},
                        {"format", format}});
    const kpo::ModelParams params(delta_over_k, 1.0, p0_over_k);
    const auto spec = kpo::converged_spectrum(params, states, tol);
    json rows = json::array();
    std::ostringstream text;
    text << "index,qfi,tail_fraction\n";
    for (std::size_t i = 0; i < states; ++i) {
        const auto r = kpo::qfi(spec, i);
        const double v = r.divergent ? std::numeric_limits<double>::infinity()
                                     : r.value / (kerr * kerr);
        text << i << ',' << fmt(v) << ',' << fmt(r.tail_fraction) << '\n';
        rows.push_back({{"index", i},
                        {"qfi", v},
                        {"tail_fraction", r.tail_fraction},
                        {"divergent", r.divergent}});
    }
    out.write(format == "json" ? rows.dump(2) + "\n" : text.str());
    return 0;
}

int run_variance(double p0_over_k, double delta_over_k, std::size_t states,
                 double tol, const std::string& format, const OutputTarget& out) {
    echo_config("variance", {{"p0_over_k", fmt(p0_over_k)},
                             {"delta_over_k", fmt(delta_over_k)},
                             {"states", std::to_string(states)},
                             {"tol", fmt(tol)},
                             {"format", format}});
    const kpo::ModelParams params(delta_over_k, 1.0, p0_over_k);
    const auto spec = kpo::converged_spectrum(params, states, tol);
    json rows = json::array();
    std::ostringstream text;
    text << "index,var_q,var_p\n";
    for (std::size_t i = 0; i < states; ++i) {
        const double vq = kpo::variance_q(spec, i);
        const double vp = kpo::variance_p(spec, i);
        text << i << ',' << fmt(vq) << ',' << fmt(vp) << '\n';
        rows.push_back({{"index", i}, {"var_q", vq}, {"var_p", vp}});
    }
    out.write(format == "json" ? rows.dump(2) + "\n" : text.str());
    return 0;
}

int run_classical(double p0_over_k, double delta_over_k, const std::string& format,
                  const OutputTarget& out) {
    echo_config("classical", {{"p0_over_k", fmt(p0_over_k)},
                              {"delta_over_k", fmt(delta_over_k)},
                              {"format", format}});
    const kpo::ModelParams params(delta_over_k, 1.0, p0_over_k);
    const auto portrait = kpo::stationary_points(params);
    if (format == "json") {
        json j = {{"delta_c_over_k", portrait.delta_c}, {"eps_min", portrait.eps_min}};
        if (portrait.eps_sad) j["eps_sad"] = *portrait.eps_sad;
        if (portrait.eps_max) j["eps_max"] = *portrait.eps_max;
        json pts = json::array();
        for (const auto& pt : portrait.stationary) {
            pts.push_back({{"kind", kpo::to_string(pt.kind)},
                           {"q", pt.q},
                           {"p", pt.p},
                           {"energy", pt.energy}});
        }
        j["stationary"] = pts;
        out.write(j.dump(2) + "\n");
        return 0;
    }
    std::ostringstream text;
    text << "delta_c_over_k " << fmt(portrait.delta_c) << '\n';
    text << "eps_min " << fmt(portrait.eps_min) << '\n';
    if (portrait.eps_sad) text << "eps_sad " << fmt(*portrait.eps_sad) << '\n';
    if (portrait.eps_max) text << "eps_max " << fmt(*portrait.eps_max) << '\n';
    for (const auto& pt : portrait.stationary) {
        text << "stationary " << kpo::to_string(pt.kind) << " q=" << fmt(pt.q)
             << " p=" << fmt(pt.p) << " energy=" << fmt(pt.energy) << '\n';
    }
    out.write(text.str());
    return 0;
}

int run_dos(double p0_over_k, double delta_over_k, const std::string& window,
            std::size_t bins, std::size_t grid_n, double tol,
            const std::string& format, const OutputTarget& out) {
    echo_config("dos", {{"p0_over_k", fmt(p0_over_k)},
                        {"delta_over_k", fmt(delta_over_k)},
                        {"window", window},
                        {"bins", std::to_string(bins)},
                        {"grid", std::to_string(grid_n)},
                        {"tol", fmt(tol)},
                        {"format", format}});
    const auto [lo, hi] = parse_range(window);
    const kpo::ModelParams params(delta_over_k, 1.0, p0_over_k);

    // Grow the converged state count until the window is covered.
    std::size_t k = 32;
    kpo::Spectrum spec = kpo::converged_spectrum(params, k, tol);
    while (spec.energies[spec.converged_count - 1] - spec.energies.front() < hi) {
        k = k * 3 / 2;
        spec = kpo::converged_spectrum(params, k, tol);
    }
    kpo::DosOptions opts;
    opts.grid_n = grid_n;
    const auto curve = kpo::quantum_dos(spec, lo, hi, bins, opts);
    if (format == "json") {
        const json j = {{"energy", curve.energies},
                        {"quantum", curve.quantum_counts},
                        {"semiclassical", curve.semiclassical},
                        {"bin_width", curve.bin_width}};
        out.write(j.dump(2) + "\n");
        return 0;
    }
    std::ostringstream text;
    text << "energy,quantum,semiclassical\n";
    for (std::size_t b = 0; b < curve.energies.size(); ++b) {
        text << fmt(curve.energies[b]) << ',' << fmt(curve.quantum_counts[b]) << ','
             << fmt(curve.semiclassical[b]) << '\n';
    }
    out.write(text.str());
    return 0;
}

int run_wigner(double p0_over_k, double delta_over_k, std::size_t state,
               std::size_t grid_n, double tol, const OutputTarget& out) {
    echo_config("wigner", {{"p0_over_k", fmt(p0_over_k)},
                           {"delta_over_k", fmt(delta_over_k)},
                           {"state", std::to_string(state)},
                           {"grid", std::to_string(grid_n)},
                           {"tol", fmt(tol)}});
    const kpo::ModelParams params(delta_over_k, 1.0, p0_over_k);
    const auto spec = kpo::converged_spectrum(params, state + 2, tol);
    const auto axis = kpo::wigner_axis(spec, state, grid_n);
    auto grid = kpo::wigner_function(spec.states[state], axis, axis);
    grid.state_index = state;
    if (grid.coverage_warning) {
        std::cerr << "warning: grid boundary carries non-negligible weight\n";
    }
    if (out.path.empty()) {
        std::ostringstream text;
        text << fmt(grid.q_axis.front()) << ' ' << fmt(grid.q_axis.back()) << ' '
             << grid.q_axis.size() << ' ' << fmt(grid.p_axis.front()) << ' '
             << fmt(grid.p_axis.back()) << ' ' << grid.p_axis.size() << '\n';
        for (std::size_t iq = 0; iq < grid.q_axis.size(); ++iq) {
            for (std::size_t ip = 0; ip < grid.p_axis.size(); ++ip) {
                if (ip) text << ' ';
                text << fmt(grid.at(iq, ip));
            }
            text << '\n';
        }
        out.write(text.str());
    } else {
        kpo::export_grid(grid, out.path);
    }
    return 0;
}

int run_crossings(double p0_over_k, const std::string& range_spec,
                  const std::string& band_spec, double tol,
                  const std::string& format, const OutputTarget& out) {
    echo_config("crossings", {{"p0_over_k", fmt(p0_over_k)},
                              {"delta_range", range_spec},
                              {"band", band_spec},
                              {"tol", fmt(tol)},
                              {"format", format}});
    const DeltaScan scan = parse_scan(range_spec);
    kpo::EnergyBand band = kpo::EnergyBand::classical();
    if (band_spec == "all") {
        band = kpo::EnergyBand::all();
    } else if (band_spec != "classical") {
        const auto [lo, hi] = parse_range(band_spec);
        band = kpo::EnergyBand::range(lo, hi);
    }
    const auto result = kpo::find_avoided_crossings(p0_over_k, scan.lo, scan.hi,
                                                    scan.steps, band, tol);
    if (result.band_empty) {
        std::cerr << "note: no classical band in the scanned range (Delta < Delta_c)\n";
    }
    if (format == "json") {
        json recs = json::array();
        for (const auto& rec : result.records) {
            recs.push_back({{"delta_over_k", rec.delta_over_k},
                            {"level_lo", rec.pair.first},
                            {"level_hi", rec.pair.second},
                            {"min_gap", rec.min_gap},
                            {"within_band", rec.within_band}});
        }
        const json j = {{"band_empty", result.band_empty}, {"records", recs}};
        out.write(j.dump(2) + "\n");
        return 0;
    }
    std::ostringstream text;
    text << "delta_over_k,level_lo,level_hi,min_gap,within_band\n";
    for (const auto& rec : result.records) {
        text << fmt(rec.delta_over_k) << ',' << rec.pair.first << ','
             << rec.pair.second << ',' << fmt(rec.min_gap) << ','
             << (rec.within_band ? 1 : 0) << '\n';
    }
    out.write(text.str());
    return 0;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_base) {
    echo_config("sweep", {{"config", config_path}});
    kpo::SweepConfig config = kpo::load_sweep_config(config_path);
    if (!out_base.empty()) config.output_path = out_base;
    if (config.output_path.empty()) {
        throw CLI::ValidationError("config has no output_path and no --out given");
    }
    const auto result = kpo::run_sweep(config);
    kpo::export_csv(result, config.output_path + ".csv");
    kpo::export_json(result, config.output_path + ".json");
    std::cerr << "wrote " << config.output_path << ".csv and .json ("
              << result.rows.size() << " rows)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kerr parametric oscillator analysis toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kpo::kVersion);
    app.footer("Physics flags are dimensionless ratios (Delta/K, P0/K, Delta/Delta_c);\n"
               "--kerr only rescales output energies. KPO_WORKERS limits sweep threads.");

    double p0_over_k = 3.0, tol = 1e-10, kerr = 1.0;
    std::optional<double> delta_over_k, delta_over_dc;
    std::size_t states = 8, bins = 64, grid_n = 2048, wigner_n = 256, state = 0;
    std::string format = "csv", out_path, window = "0:10", config_path;
    std::string range_spec, band_spec = "classical";

    auto add_common = [&](CLI::App* sub, bool with_delta = true) {
        sub->add_option("--p0-over-k", p0_over_k, "pump amplitude P0/K (dimensionless)")
            ->capture_default_str();
        if (with_delta) {
            sub->add_option("--delta-over-k", delta_over_k,
                            "detuning Delta/K (dimensionless)");
            sub->add_option("--delta-over-dc", delta_over_dc,
                            "detuning Delta/Delta_c (dimensionless)");
        }
        sub->add_option("--tol", tol, "truncation tolerance (relative, floor K)")
            ->capture_default_str();
        sub->add_option("--out", out_path, "output file (default: stdout)");
        sub->add_option("--format", format, "csv|json")->capture_default_str();
        return sub;
    };

    auto* sp = add_common(app.add_subcommand("spectrum", "converged eigenvalues"));
    sp->add_option("--states", states, "number of states")->capture_default_str();
    sp->add_option("--kerr", kerr, "Kerr energy scale K (output units)")
        ->capture_default_str();

    auto* qf = add_common(app.add_subcommand("qfi", "quantum Fisher information"));
    qf->add_option("--states", states, "number of states")->capture_default_str();
    qf->add_option("--kerr", kerr, "Kerr energy scale K (output units)")
        ->capture_default_str();

    auto* va = add_common(app.add_subcommand("variance", "position/momentum variances"));
    va->add_option("--states", states, "number of states")->capture_default_str();

    auto* cl = add_common(app.add_subcommand("classical", "stationary points and "
                                             "critical energies"));

    auto* ds = add_common(app.add_subcommand("dos", "density of states"));
    ds->add_option("--window", window, "energy window above ground, lo:hi (units K)")
        ->capture_default_str();
    ds->add_option("--bins", bins, "histogram bins")->capture_default_str();
    ds->add_option("--grid", grid_n, "area quadrature resolution")->capture_default_str();

    auto* wg = add_common(app.add_subcommand("wigner", "Wigner function grid"));
    wg->add_option("--state", state, "eigenstate index")->capture_default_str();
    wg->add_option("--grid", wigner_n, "grid points per axis")->capture_default_str();

    auto* cr = app.add_subcommand("crossings", "avoided-crossing detector");
    cr->add_option("--p0-over-k", p0_over_k, "pump amplitude P0/K (dimensionless)")
        ->capture_default_str();
    cr->add_option("--delta-range", range_spec,
                   "scan lo:hi:steps in Delta/K (dimensionless)")
        ->required();
    cr->add_option("--band", band_spec,
                   "classical | all | lo:hi (energies above ground, units K)")
        ->capture_default_str();
    cr->add_option("--tol", tol, "truncation tolerance")->capture_default_str();
    cr->add_option("--out", out_path, "output file (default: stdout)");
    cr->add_option("--format", format, "csv|json")->capture_default_str();

    auto* sw = app.add_subcommand("sweep", "parameter sweep from a JSON config");
    sw->add_option("--config", config_path, "sweep configuration file (JSON)")
        ->required();
    sw->add_option("--out", out_path, "output base path (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // invalid arguments
    }

    if (format != "csv" && format != "json") {
        std::cerr << "error: --format must be csv or json\n";
        return 1;
    }

    try {
        const OutputTarget out{out_path};
        if (sp->parsed()) {
            return run_spectrum(p0_over_k,
                                resolve_delta_over_k(delta_over_k, delta_over_dc, p0_over_k),
                                states, tol, kerr, format, out);
        }
        if (qf->parsed()) {
            return run_qfi(p0_over_k,
                           resolve_delta_over_k(delta_over_k, delta_over_dc, p0_over_k),
                           states, tol, kerr, format, out);
        }
        if (va->parsed()) {
            return run_variance(p0_over_k,
                                resolve_delta_over_k(delta_over_k, delta_over_dc, p0_over_k),
                                states, tol, format, out);
        }
        if (cl->parsed()) {
            return run_classical(p0_over_k,
                                 resolve_delta_over_k(delta_over_k, delta_over_dc, p0_over_k),
                                 format, out);
        }
        if (ds->parsed()) {
            return run_dos(p0_over_k,
                           resolve_delta_over_k(delta_over_k, delta_over_dc, p0_over_k),
                           window, bins, grid_n, tol, format, out);
        }
        if (wg->parsed()) {
            return run_wigner(p0_over_k,
                              resolve_delta_over_k(delta_over_k, delta_over_dc, p0_over_k),
                              state, wigner_n, tol, out);
        }
        if (cr->parsed()) {
            return run_crossings(p0_over_k, range_spec, band_spec, tol, format, out);
        }
        if (sw->parsed()) {
            return run_sweep_cmd(config_path, out_path);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const kpo::io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const kpo::truncation_failure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const kpo::solver_failure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const kpo::convergence_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
