// knotlat command-line interface: model parameters come from flags, with a
// flat key=value config file supplying defaults for anything not given on the
// command line. Every file-writing command also emits a manifest with the
// resolved config and per-file checksums.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "knotlat/braid.hpp"
#include "knotlat/errors.hpp"
#include "knotlat/io.hpp"
#include "knotlat/manybody.hpp"
#include "knotlat/model.hpp"
#include "knotlat/parallel.hpp"
#include "knotlat/spectral.hpp"
#include "knotlat/topology.hpp"

namespace {

using namespace knotlat;

struct StopWatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

double to_double(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError(what + ": not a number: \"" + s + "\"");
    }
    if (pos != s.size()) throw ConfigError(what + ": trailing characters in \"" + s + "\"");
    return v;
}

int to_int(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError(what + ": not an integer: \"" + s + "\"");
    }
    if (pos != s.size()) throw ConfigError(what + ": trailing characters in \"" + s + "\"");
    return v;
}

bool to_bool(const std::string& s, const std::string& what) {
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    throw ConfigError(what + ": not a boolean: \"" + s + "\"");
}

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
    std::vector<int> out;
    std::string token;
    std::stringstream ss(s);
    while (std::getline(ss, token, ',')) {
        const auto b = token.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = token.find_last_not_of(" \t");
        out.push_back(to_int(token.substr(b, e - b + 1), what));
    }
    if (out.empty()) throw ConfigError(what + ": empty list");
    return out;
}

// Applies config-file values to options the user did not set on the command
// line, and can echo every resolved value into the manifest.
class Binder {
  public:
    template <typename T>
    void bind(CLI::Option* opt, T& var, const std::string& key) {
        items_.push_back(Item{
            opt, key,
            [&var, key](const std::string& s) {
                if constexpr (std::is_same_v<T, double>)
                    var = to_double(s, key);
                else if constexpr (std::is_same_v<T, int>)
                    var = to_int(s, key);
                else if constexpr (std::is_same_v<T, bool>)
                    var = to_bool(s, key);
                else
                    var = s;
            },
            [&var]() {
                if constexpr (std::is_same_v<T, double>)
                    return format_number(var);
                else if constexpr (std::is_same_v<T, int>)
                    return std::to_string(var);
                else if constexpr (std::is_same_v<T, bool>)
                    return std::string(var ? "1" : "0");
                else
                    return std::string(var);
            }});
    }

    void apply(const std::map<std::string, std::string>& cfg) {
        for (Item& it : items_) {
            if (it.opt && it.opt->count() > 0) continue; // CLI flag wins
            const auto f = cfg.find(it.key);
            if (f != cfg.end()) it.set(f->second);
        }
    }

    std::map<std::string, std::string> echo() const {
        std::map<std::string, std::string> out;
        for (const Item& it : items_) out[it.key] = it.get();
        return out;
    }

  private:
    struct Item {
        CLI::Option* opt;
        std::string key;
        std::function<void(const std::string&)> set;
        std::function<std::string()> get;
    };
    std::vector<Item> items_;
};

struct ModelFlags {
    ModelParams p;

    void attach(CLI::App* cmd, Binder& b) {
        b.bind(cmd->add_option("--t1", p.t1, "A-B hop"), p.t1, "t1");
        b.bind(cmd->add_option("--t2", p.t2, "B-C hop"), p.t2, "t2");
        b.bind(cmd->add_option("--t3", p.t3, "C-D hop"), p.t3, "t3");
        b.bind(cmd->add_option("--t4", p.t4, "D-A(next cell) hop"), p.t4, "t4");
        b.bind(cmd->add_option("--lambda", p.lambda, "non-Hermitian strength"), p.lambda,
               "lambda");
        b.bind(cmd->add_option("--mu", p.mu, "same-sublattice asymmetry"), p.mu, "mu");
        b.bind(cmd->add_option("--q", p.q, "same-sublattice hop range"), p.q, "q");
    }
};

void ensure_parent_dir(const std::string& prefix) {
    const auto parent = std::filesystem::path(prefix).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::vector<int> default_cuts(int sites) {
    std::vector<int> cuts;
    for (int j = 1; j <= 15; ++j) {
        int la = static_cast<int>(std::lround(j * sites / 16.0));
        la = std::min(std::max(la, 1), sites - 1);
        if (cuts.empty() || cuts.back() != la) cuts.push_back(la);
    }
    return cuts;
}

struct CommonState {
    std::string config_path;
    std::string workers = "auto";

    void resolve_workers() const {
        if (workers != "auto") {
            const int n = to_int(workers, "workers");
            if (n < 1) throw ConfigError("workers: must be >= 1 or \"auto\"");
            setenv("KNOTLAT_WORKERS", std::to_string(n).c_str(), 1);
        }
        worker_count(); // validates KNOTLAT_WORKERS early
    }

    std::map<std::string, std::string> load_config() const {
        if (config_path.empty()) return {};
        return parse_config_file(config_path);
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"knotlat: non-Hermitian four-band lattice toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    CommonState common;
    app.add_option("--config", common.config_path, "flat key=value defaults file");
    app.add_option("--workers", common.workers, "worker threads (integer or \"auto\")");

    // ---------------- symcheck ----------------
    auto* c_sym = app.add_subcommand("symcheck", "evaluate symmetry residuals");
    static Binder b_sym;
    static ModelFlags m_sym;
    static int sym_samples = 64;
    m_sym.attach(c_sym, b_sym);
    b_sym.bind(c_sym->add_option("--k-samples", sym_samples, "wave vectors tested"), sym_samples,
               "k_samples");
    static int exit_override = 0;
    c_sym->callback([&] {
        common.resolve_workers();
        b_sym.apply(common.load_config());
        m_sym.p.validate();
        const SymmetryReport r = symmetry_residuals(m_sym.p, sym_samples);
        const double thr = 1e-12;
        const bool applicable = r.t1_equals_t3;
        const bool phs_ok = r.phs < thr;
        const bool t_ok = !applicable || r.t_sym < thr;
        const bool g_ok = !applicable || r.gamma < thr;
        std::printf("%-12s %-14s %-10s %s\n", "symmetry", "residual", "threshold", "status");
        std::printf("%-12s %-14.3e %-10.0e %s\n", "PHS_dagger", r.phs, thr,
                    phs_ok ? "pass" : "FAIL");
        std::printf("%-12s %-14.3e %-10.0e %s\n", "T", r.t_sym, thr,
                    !applicable ? "not applicable (t1 != t3)" : (t_ok ? "pass" : "FAIL"));
        std::printf("%-12s %-14.3e %-10.0e %s\n", "Gamma", r.gamma, thr,
                    !applicable ? "not applicable (t1 != t3)" : (g_ok ? "pass" : "FAIL"));
        if (!(phs_ok && t_ok && g_ok)) exit_override = 1;
    });

    // ---------------- spectrum ----------------
    auto* c_spec = app.add_subcommand("spectrum", "tracked band CSV over the Brillouin zone");
    static Binder b_spec;
    static ModelFlags m_spec;
    static int spec_nk = 1024;
    static std::string spec_out = "out/spectrum";
    m_spec.attach(c_spec, b_spec);
    b_spec.bind(c_spec->add_option("--n-k", spec_nk, "grid intervals"), spec_nk, "n_k");
    b_spec.bind(c_spec->add_option("--out", spec_out, "output prefix"), spec_out, "out");
    c_spec->callback([&] {
        common.resolve_workers();
        b_spec.apply(common.load_config());
        m_spec.p.validate();
        StopWatch sw;
        const EnergyStrings s = track_bands(m_spec.p, spec_nk);
        const double compute_ms = sw.ms();
        ensure_parent_dir(spec_out);
        StopWatch ww;
        const std::string csv = spec_out + ".csv";
        write_spectrum_csv(csv, s);
        auto cfg = b_spec.echo();
        cfg["command"] = "spectrum";
        write_manifest(spec_out + ".manifest.json", cfg, {{csv, "spectrum-v1"}},
                       {{"compute_ms", compute_ms}, {"write_ms", ww.ms()}});
        std::printf("wrote %s (%zu samples)\n", csv.c_str(), s.k_grid.size());
        std::printf("endpoint permutation: %d %d %d %d\n", s.endpoint_permutation[0],
                    s.endpoint_permutation[1], s.endpoint_permutation[2],
                    s.endpoint_permutation[3]);
    });

    // ---------------- braid ----------------
    auto* c_braid = app.add_subcommand("braid", "braid word, linking invariants, knot class");
    static Binder b_braid;
    static ModelFlags m_braid;
    static int braid_nk = 1024;
    static double braid_theta = 0.0;
    static std::string braid_out = "out/braid";
    m_braid.attach(c_braid, b_braid);
    b_braid.bind(c_braid->add_option("--n-k", braid_nk, "grid intervals"), braid_nk, "n_k");
    b_braid.bind(c_braid->add_option("--theta", braid_theta, "projection angle"), braid_theta,
                 "theta");
    b_braid.bind(c_braid->add_option("--out", braid_out, "output prefix"), braid_out, "out");
    c_braid->callback([&] {
        common.resolve_workers();
        b_braid.apply(common.load_config());
        m_braid.p.validate();
        StopWatch sw;
        const EnergyStrings s = track_bands(m_braid.p, braid_nk);
        const BraidWord w = extract_braid(s, braid_theta);
        const LinkingMatrix inv = linking_invariants(w);
        const KnotClass kc = classify_knot(inv);
        const double compute_ms = sw.ms();
        ensure_parent_dir(braid_out);
        StopWatch ww;
        const std::string tok = braid_out + ".braid";
        const std::string ijson = braid_out + ".invariants.json";
        write_braid_token_file(tok, w);
        write_braid_invariants_json(ijson, w, inv, kc, braid_nk);
        auto cfg = b_braid.echo();
        cfg["command"] = "braid";
        write_manifest(braid_out + ".manifest.json", cfg,
                       {{tok, "braid-word-v1"}, {ijson, "braid-invariants-v1"}},
                       {{"compute_ms", compute_ms}, {"write_ms", ww.ms()}});
        std::printf("word: %s\n", to_token_stream(w).c_str());
        std::printf("knot: %s\n", kc.label().c_str());
        std::printf("components: %d\n", kc.summary.component_count);
    });

    // ---------------- winding ----------------
    auto* c_wind = app.add_subcommand("winding", "spectral winding number at one point");
    static Binder b_wind;
    static ModelFlags m_wind;
    static int wind_nk = 256;
    m_wind.attach(c_wind, b_wind);
    b_wind.bind(c_wind->add_option("--n-k", wind_nk, "initial grid"), wind_nk, "n_k");
    c_wind->callback([&] {
        common.resolve_workers();
        b_wind.apply(common.load_config());
        m_wind.p.validate();
        const WindingResult r = winding_number(m_wind.p, wind_nk);
        std::printf("w = %d\n", r.w);
        std::printf("w_raw = %s\n", format_number(r.w_raw).c_str());
        std::printf("min_abs_f = %s\n", format_number(r.min_abs_f).c_str());
        std::printf("n_k_used = %d\n", r.n_k_used);
    });

    // ---------------- boundaries ----------------
    auto* c_bnd = app.add_subcommand("boundaries", "analytic phase-boundary roots and curves");
    static Binder b_bnd;
    static ModelFlags m_bnd;
    static std::string bnd_out;
    static double bnd_t2min = 0.0, bnd_t2max = 3.0;
    static int bnd_samples = 301;
    m_bnd.attach(c_bnd, b_bnd);
    b_bnd.bind(c_bnd->add_option("--out", bnd_out, "optional output prefix for curve CSV"),
               bnd_out, "out");
    b_bnd.bind(c_bnd->add_option("--t2-min", bnd_t2min, "curve sampling start"), bnd_t2min,
               "t2_min");
    b_bnd.bind(c_bnd->add_option("--t2-max", bnd_t2max, "curve sampling end"), bnd_t2max,
               "t2_max");
    b_bnd.bind(c_bnd->add_option("--samples", bnd_samples, "curve samples per branch"),
               bnd_samples, "samples");
    c_bnd->callback([&] {
        common.resolve_workers();
        b_bnd.apply(common.load_config());
        m_bnd.p.validate();
        const BoundaryRoots roots = phase_boundary_lambdas(m_bnd.p);
        for (double r : roots.roots) std::printf("%.6f\n", r);
        if (roots.dropped_complex > 0)
            std::fprintf(stderr, "note: %d non-real root slots dropped\n", roots.dropped_complex);
        if (!bnd_out.empty()) {
            const auto curves =
                sample_boundary_curves(m_bnd.p, bnd_t2min, bnd_t2max, bnd_samples);
            ensure_parent_dir(bnd_out);
            const std::string csv = bnd_out + ".csv";
            write_boundary_csv(csv, curves);
            auto cfg = b_bnd.echo();
            cfg["command"] = "boundaries";
            write_manifest(bnd_out + ".manifest.json", cfg, {{csv, "boundary-curves-v1"}}, {});
        }
    });

    // ---------------- phase-diagram ----------------
    auto* c_pd = app.add_subcommand("phase-diagram", "winding-number sweep over (lambda, t2)");
    static Binder b_pd;
    static ModelFlags m_pd;
    static double pd_lmin = 0.0, pd_lmax = 1.5, pd_tmin = 0.0, pd_tmax = 3.0;
    static int pd_rl = 64, pd_rt = 64, pd_nk = 256, pd_braid_nk = 512;
    static bool pd_knots = false, pd_svg = false;
    static std::string pd_out = "out/phase";
    m_pd.attach(c_pd, b_pd);
    b_pd.bind(c_pd->add_option("--lambda-min", pd_lmin, ""), pd_lmin, "lambda_min");
    b_pd.bind(c_pd->add_option("--lambda-max", pd_lmax, ""), pd_lmax, "lambda_max");
    b_pd.bind(c_pd->add_option("--t2-min", pd_tmin, ""), pd_tmin, "t2_min");
    b_pd.bind(c_pd->add_option("--t2-max", pd_tmax, ""), pd_tmax, "t2_max");
    b_pd.bind(c_pd->add_option("--res-lambda", pd_rl, "grid points along lambda"), pd_rl,
              "res_lambda");
    b_pd.bind(c_pd->add_option("--res-t2", pd_rt, "grid points along t2"), pd_rt, "res_t2");
    b_pd.bind(c_pd->add_option("--n-k", pd_nk, "winding grid"), pd_nk, "n_k");
    b_pd.bind(c_pd->add_option("--braid-n-k", pd_braid_nk, "knot tracking grid"), pd_braid_nk,
              "braid_n_k");
    b_pd.bind(c_pd->add_flag("--with-knots", pd_knots, "classify knots per cell"), pd_knots,
              "with_knots");
    b_pd.bind(c_pd->add_flag("--svg", pd_svg, "emit SVG heatmap"), pd_svg, "svg");
    b_pd.bind(c_pd->add_option("--out", pd_out, "output prefix"), pd_out, "out");
    c_pd->callback([&] {
        common.resolve_workers();
        b_pd.apply(common.load_config());
        m_pd.p.validate();
        StopWatch sw;
        const PhaseDiagramGrid g = sweep_phase_diagram(m_pd.p, pd_lmin, pd_lmax, pd_tmin, pd_tmax,
                                                       pd_rl, pd_rt, pd_nk, pd_knots, pd_braid_nk);
        const double compute_ms = sw.ms();
        ensure_parent_dir(pd_out);
        StopWatch ww;
        const std::string csv = pd_out + ".csv";
        const std::string meta = pd_out + ".meta.json";
        write_phase_csv(csv, g);
        write_phase_meta_json(meta, g);
        std::vector<ManifestFile> files = {{csv, "phase-diagram-v1"},
                                           {meta, "phase-diagram-meta-v1"}};
        if (pd_svg) {
            const auto curves = sample_boundary_curves(m_pd.p, pd_tmin, pd_tmax, 512);
            const std::string svg = pd_out + ".svg";
            write_phase_svg(svg, g, curves);
            files.push_back({svg, "phase-svg-v1"});
        }
        auto cfg = b_pd.echo();
        cfg["command"] = "phase-diagram";
        cfg["workers"] = std::to_string(worker_count());
        write_manifest(pd_out + ".manifest.json", cfg, files,
                       {{"compute_ms", compute_ms}, {"write_ms", ww.ms()}});
        int flagged = 0;
        std::map<int, int> counts;
        for (const auto& row : g.cells)
            for (const PhaseCell& c : row) {
                if (c.boundary)
                    ++flagged;
                else
                    ++counts[c.winding];
            }
        std::printf("grid %dx%d, %d boundary-flagged cells\n", pd_rl, pd_rt, flagged);
        for (const auto& [w, n] : counts) std::printf("w=%d: %d cells\n", w, n);
    });

    // ---------------- ee-cut ----------------
    auto* c_eec = app.add_subcommand("ee-cut", "entanglement entropy vs cut position");
    static Binder b_eec;
    static ModelFlags m_eec;
    static int eec_sites = 1600;
    static std::string eec_cuts, eec_out = "out/ee_cut";
    m_eec.attach(c_eec, b_eec);
    b_eec.bind(c_eec->add_option("--sites", eec_sites, "lattice sites (multiple of 4)"),
               eec_sites, "sites");
    b_eec.bind(c_eec->add_option("--cuts", eec_cuts, "comma list of L_A (default: L/16 steps)"),
               eec_cuts, "cuts");
    b_eec.bind(c_eec->add_option("--out", eec_out, "output prefix"), eec_out, "out");
    c_eec->callback([&] {
        common.resolve_workers();
        b_eec.apply(common.load_config());
        m_eec.p.validate();
        const std::vector<int> cuts =
            eec_cuts.empty() ? default_cuts(eec_sites) : parse_int_list(eec_cuts, "cuts");
        StopWatch sw;
        const EntropyCurve curve = entropy_vs_cut(m_eec.p, eec_sites, cuts);
        const double compute_ms = sw.ms();
        ensure_parent_dir(eec_out);
        const std::string csv = eec_out + ".csv";
        write_entropy_csv(csv, curve);
        auto cfg = b_eec.echo();
        cfg["command"] = "ee-cut";
        write_manifest(eec_out + ".manifest.json", cfg, {{csv, "entropy-cut-v1"}},
                       {{"compute_ms", compute_ms}});
        std::printf("wrote %s (%zu cuts)\n", csv.c_str(), curve.abscissa.size());
    });

    // ---------------- ee-size ----------------
    auto* c_ees = app.add_subcommand("ee-size", "half-cut entanglement entropy vs system size");
    static Binder b_ees;
    static ModelFlags m_ees;
    static std::string ees_sizes = "200,400,800,1600", ees_out = "out/ee_size";
    m_ees.attach(c_ees, b_ees);
    b_ees.bind(c_ees->add_option("--sizes", ees_sizes, "comma list of L"), ees_sizes, "sizes");
    b_ees.bind(c_ees->add_option("--out", ees_out, "output prefix"), ees_out, "out");
    c_ees->callback([&] {
        common.resolve_workers();
        b_ees.apply(common.load_config());
        m_ees.p.validate();
        StopWatch sw;
        const EntropyCurve curve =
            entropy_vs_size(m_ees.p, parse_int_list(ees_sizes, "sizes"));
        const double compute_ms = sw.ms();
        ensure_parent_dir(ees_out);
        const std::string csv = ees_out + ".csv";
        write_entropy_csv(csv, curve);
        auto cfg = b_ees.echo();
        cfg["command"] = "ee-size";
        write_manifest(ees_out + ".manifest.json", cfg, {{csv, "entropy-size-v1"}},
                       {{"compute_ms", compute_ms}});
        std::printf("wrote %s (%zu sizes)\n", csv.c_str(), curve.abscissa.size());
    });

    // ---------------- cfit ----------------
    auto* c_fit = app.add_subcommand("cfit", "central-charge fit of an entropy curve");
    static Binder b_fit;
    static ModelFlags m_fit;
    static std::string fit_mode = "cut", fit_input, fit_out = "out/cfit";
    static int fit_sites = 1600;
    static std::string fit_cuts, fit_sizes = "200,400,800,1600";
    m_fit.attach(c_fit, b_fit);
    b_fit.bind(c_fit->add_option("--mode", fit_mode, "cut | size"), fit_mode, "mode");
    b_fit.bind(c_fit->add_option("--input", fit_input, "existing entropy CSV (skip compute)"),
               fit_input, "input");
    b_fit.bind(c_fit->add_option("--sites", fit_sites, "lattice sites for cut mode"), fit_sites,
               "sites");
    b_fit.bind(c_fit->add_option("--cuts", fit_cuts, "cut list for cut mode"), fit_cuts, "cuts");
    b_fit.bind(c_fit->add_option("--sizes", fit_sizes, "size list for size mode"), fit_sizes,
               "sizes");
    b_fit.bind(c_fit->add_option("--out", fit_out, "output prefix"), fit_out, "out");
    c_fit->callback([&] {
        common.resolve_workers();
        b_fit.apply(common.load_config());
        m_fit.p.validate();
        if (fit_mode != "cut" && fit_mode != "size")
            throw ConfigError("cfit: --mode must be cut or size");
        StopWatch sw;
        EntropyCurve curve;
        if (!fit_input.empty()) {
            curve = read_entropy_csv(fit_input);
        } else if (fit_mode == "cut") {
            const std::vector<int> cuts =
                fit_cuts.empty() ? default_cuts(fit_sites) : parse_int_list(fit_cuts, "cuts");
            curve = entropy_vs_cut(m_fit.p, fit_sites, cuts);
        } else {
            curve = entropy_vs_size(m_fit.p, parse_int_list(fit_sizes, "sizes"));
        }
        const FitResult fit = fit_mode == "cut" ? fit_cardy_calabrese(curve, fit_sites)
                                                : fit_log_scaling(curve);
        const double compute_ms = sw.ms();
        std::printf("c = %s +- %s\n", format_number(fit.c).c_str(),
                    format_number(fit.c_stderr).c_str());
        std::printf("intercept = %s\n", format_number(fit.intercept).c_str());
        std::printf("rms_residual = %s\n", format_number(fit.rms_residual).c_str());
        std::printf("window = [%s, %s]\n", format_number(fit.window.first).c_str(),
                    format_number(fit.window.second).c_str());
        std::printf("poor_fit = %s\n", fit.poor_fit ? "yes" : "no");
        ensure_parent_dir(fit_out);
        write_fit_json(fit_out + ".fit.json", fit, fit_mode);
        auto cfg = b_fit.echo();
        cfg["command"] = "cfit";
        write_manifest(fit_out + ".manifest.json", cfg, {{fit_out + ".fit.json", "cfit-v1"}},
                       {{"compute_ms", compute_ms}});
    });

    // ---------------- fidelity ----------------
    auto* c_fid = app.add_subcommand("fidelity", "ground-state fidelity at one point");
    static Binder b_fid;
    static ModelFlags m_fid;
    static int fid_sites = 600;
    static double fid_eps = 0.01;
    m_fid.attach(c_fid, b_fid);
    b_fid.bind(c_fid->add_option("--sites", fid_sites, "lattice sites (multiple of 4)"),
               fid_sites, "sites");
    b_fid.bind(c_fid->add_option("--eps", fid_eps, "lambda perturbation"), fid_eps, "eps");
    c_fid->callback([&] {
        common.resolve_workers();
        b_fid.apply(common.load_config());
        m_fid.p.validate();
        const FidelityResult r = fidelity(m_fid.p, fid_sites, fid_eps);
        std::printf("F = %s %+si\n", format_number(r.f.real()).c_str(),
                    format_number(r.f.imag()).c_str());
        std::printf("chi = %s %+si\n", format_number(r.chi.real()).c_str(),
                    format_number(r.chi.imag()).c_str());
        std::printf("abs_chi = %s\n", format_number(std::abs(r.chi)).c_str());
    });

    // ---------------- fidelity-scan ----------------
    auto* c_fs = app.add_subcommand("fidelity-scan", "log(1+|chi|) grid over (lambda, t2)");
    static Binder b_fs;
    static ModelFlags m_fs;
    static double fs_lmin = 0.0, fs_lmax = 1.5, fs_tmin = 0.0, fs_tmax = 3.0, fs_eps = 0.01;
    static int fs_rl = 48, fs_rt = 48, fs_sites = 600;
    static bool fs_svg = false;
    static std::string fs_out = "out/fidelity";
    m_fs.attach(c_fs, b_fs);
    b_fs.bind(c_fs->add_option("--lambda-min", fs_lmin, ""), fs_lmin, "lambda_min");
    b_fs.bind(c_fs->add_option("--lambda-max", fs_lmax, ""), fs_lmax, "lambda_max");
    b_fs.bind(c_fs->add_option("--t2-min", fs_tmin, ""), fs_tmin, "t2_min");
    b_fs.bind(c_fs->add_option("--t2-max", fs_tmax, ""), fs_tmax, "t2_max");
    b_fs.bind(c_fs->add_option("--res-lambda", fs_rl, ""), fs_rl, "res_lambda");
    b_fs.bind(c_fs->add_option("--res-t2", fs_rt, ""), fs_rt, "res_t2");
    b_fs.bind(c_fs->add_option("--sites", fs_sites, "lattice sites"), fs_sites, "sites");
    b_fs.bind(c_fs->add_option("--eps", fs_eps, "lambda perturbation"), fs_eps, "eps");
    b_fs.bind(c_fs->add_flag("--svg", fs_svg, "emit SVG heatmap"), fs_svg, "svg");
    b_fs.bind(c_fs->add_option("--out", fs_out, "output prefix"), fs_out, "out");
    c_fs->callback([&] {
        common.resolve_workers();
        b_fs.apply(common.load_config());
        m_fs.p.validate();
        StopWatch sw;
        const FidelityGrid g = fidelity_scan(m_fs.p, fs_lmin, fs_lmax, fs_tmin, fs_tmax, fs_rl,
                                             fs_rt, fs_sites, fs_eps);
        const double compute_ms = sw.ms();
        ensure_parent_dir(fs_out);
        const std::string csv = fs_out + ".csv";
        write_fidelity_csv(csv, g);
        std::vector<ManifestFile> files = {{csv, "fidelity-scan-v1"}};
        if (fs_svg) {
            const auto curves = sample_boundary_curves(m_fs.p, fs_tmin, fs_tmax, 512);
            write_fidelity_svg(fs_out + ".svg", g, curves);
            files.push_back({fs_out + ".svg", "fidelity-svg-v1"});
        }
        auto cfg = b_fs.echo();
        cfg["command"] = "fidelity-scan";
        cfg["workers"] = std::to_string(worker_count());
        write_manifest(fs_out + ".manifest.json", cfg, files, {{"compute_ms", compute_ms}});
        std::printf("wrote %s (%dx%d)\n", csv.c_str(), fs_rl, fs_rt);
    });

    try {
        app.parse(argc, argv);
        return exit_override;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const DimensionError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "computation error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
