#include "hb/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "hb/dbar.hpp"
#include "hb/flow.hpp"
#include "hb/higgs.hpp"
#include "hb/json_io.hpp"
#include "hb/kahler.hpp"
#include "hb/l2sheaf.hpp"
#include "hb/model.hpp"
#include "hb/monodromy.hpp"
#include "hb/rng.hpp"
#include "hb/suite.hpp"

namespace hb {

namespace {

// Collects parameters and input bytes; both feed the inputs digest.
struct Inputs {
    Json params = Json::object();
    std::string bytes;

    Json load(const std::string& key, const std::string& path) {
        const std::string text = read_file(path);
        bytes += key + '\n' + text + '\n';
        return parse_json(text, path);
    }
    std::string digest() const { return sha256_hex(params.dump() + '\n' + bytes); }
};

struct GridSize {
    int a = 0, b = 0;
};

GridSize parse_grid(const std::string& s, const std::string& flag) {
    GridSize g;
    char x = 0;
    std::istringstream is(s);
    if (!(is >> g.a >> x >> g.b) || x != 'x' || !is.eof() || g.a < 2 || g.b < 2) {
        throw InputError(flag + " expects AxB with A, B >= 2, got \"" + s + "\"");
    }
    return g;
}

template <class T>
std::vector<T> parse_list(const std::string& s, const std::string& flag) {
    std::vector<T> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) {
        std::istringstream v(item);
        T value{};
        if (!(v >> value) || !v.eof()) throw InputError(flag + " expects a comma-separated list, got \"" + s + "\"");
        out.push_back(value);
    }
    if (out.empty()) throw InputError(flag + " is empty");
    return out;
}

Json profile_json(const std::vector<int>& p) { return Json(p); }

void cmd_sl2(ReportDocument& r, Inputs& in, const std::string& path) {
    const Json j = in.load("in", path);
    const NilpotentLog n = nilpotent_from_json(j);
    const Sl2Data s = sl2_triple(n);
    const BracketReport br = check_brackets(s);
    const FiltrationReport fr = check_filtration(n, weight_filtration(s));
    const bool agree = same_filtration(weight_filtration(s), weight_filtration_from_kernels(n));
    r.conventions = {{"labels", "N e_j = e_{j-2}"}, {"H0", "-Y"}};
    r.data["sl2"] = sl2_to_json(s);
    r.data["profile"] = profile_json(s.profile);
    r.data["exact"] = br.exact;
    Json dims = Json::object();
    const auto w = weight_filtration(s);
    for (int l : w.weights) dims[std::to_string(l)] = w.dim_at(l);
    r.data["filtration_dims"] = dims;
    if (br.exact) {
        r.check_true("sl2 brackets hold exactly", br.holds());
    } else {
        r.check_le("[H0,N] - 2N", br.h_n, 1e-10);
        r.check_le("[H0,N-] + 2N-", br.h_nminus, 1e-10);
        r.check_le("[N,N-] - H0", br.n_nminus, 1e-10);
        r.check_le("adapted basis chains", br.chain, 1e-10);
    }
    r.check_true("filtration nested", fr.nested);
    r.check_true("N lowers the filtration by two", fr.lowers_by_two);
    r.check_true("N^l: Gr_l -> Gr_-l bijective", fr.gr_isomorphic);
    r.check_true("filtration agrees with the kernel construction", agree);
}

ModelMetric load_model(ReportDocument& r, Inputs& in, const std::string& path) {
    const ModelMetric m = model_from_json(in.load("model", path));
    r.conventions = convention_to_json(m.convention());
    r.data["profile"] = profile_json(m.sl2().profile);
    r.data["alpha"] = m.alpha();
    return m;
}

void cmd_model(ReportDocument& r, Inputs& in, const std::string& path, const std::vector<double>& ys,
               int samples, unsigned long long seed) {
    const ModelMetric m = load_model(r, in, path);
    Rng rng(seed);
    std::vector<PuncturedPoint> pts;
    const double ymin = std::max(1.0, -std::log(m.alpha()) + 1.0);
    for (int i = 0; i < samples; ++i) pts.push_back({rng.uniform(-10.0, 10.0), rng.uniform(ymin, ymin + 60.0)});
    const double dev = check_equivariance(m, pts).max_rel_deviation;
    Json norms = Json::array();
    for (double y : ys) {
        Json row = Json::array();
        for (const auto& [label, value] : norm_profile(m, y)) row.push_back({{"label", label}, {"norm2", number(value)}});
        norms.push_back({{"y", y}, {"basis", row}});
    }
    r.data["norm_profile"] = norms;
    r.data["harmonicity_residual_32"] = number(harmonicity_residual(m, {}));
    r.check_lt("equivariance max relative deviation", dev, 1e-12);
}

void cmd_energy(ReportDocument& r, Inputs& in, const std::string& path, double y0) {
    const ModelMetric m = load_model(r, in, path);
    r.data["y0"] = y0;
    EnergyResult e;
    try {
        e = total_energy(m, y0);
    } catch (const Error& ex) {
        r.data["error"] = ex.what();
        r.check_true("energy finite", false);
        return;
    }
    r.data["closed_form"] = number(e.closed_form);
    r.data["numeric"] = number(e.numeric);
    r.data["rel_err"] = number(e.rel_err);
    r.data["tail"] = number(e.tail);
    r.check_lt("rel_err", e.rel_err, 5e-3);
}

struct FlowOptions {
    std::string model, grid = "32x32", csv;
    double y0 = 5.0, y1 = 5.0 + kTwoPi, tol = 1e-8, size = 0.1;
    unsigned long long perturb = 1;
};

void cmd_flow(ReportDocument& r, Inputs& in, const FlowOptions& o) {
    const ModelMetric m = load_model(r, in, o.model);
    const GridSize gs = parse_grid(o.grid, "--grid");
    if (!(o.y1 > o.y0)) throw InputError("--y1 must exceed --y0");
    const GridMap g = GridMap::from_model(m, gs.a, gs.b, o.y0, o.y1);
    FlowConfig cfg;
    cfg.tol = o.tol;
    const FlowResult ref = relax(g, cfg);
    const FlowResult run = relax(perturb(g, o.size, o.perturb), cfg);
    bool monotone = true;
    for (std::size_t i = 1; i < run.energy.size(); ++i)
        if (run.energy[i] > run.energy[i - 1] * (1.0 + 1e-13)) monotone = false;
    const double spread = sup_dist(run.map, ref.map);
    const GradientBound gb = gradient_bound_check(run.map);
    r.data["reference"] = {{"sweeps", ref.sweeps}, {"residual", number(ref.residual)}};
    r.data["perturbed"] = {{"sweeps", run.sweeps},
                           {"residual", number(run.residual)},
                           {"energy_initial", number(run.energy.front())},
                           {"energy_final", number(run.energy.back())},
                           {"max_seam_deviation", number(run.max_seam_deviation)}};
    r.data["model_sup_dist"] = number(sup_dist(ref.map, g));
    r.data["gradient_bound_C"] = number(gb.C);
    r.check_true("reference converged", ref.converged);
    r.check_true("perturbed run converged", run.converged);
    r.check_lt("tension sup", run.residual, o.tol);
    r.check_true("energy non-increasing", monotone);
    r.check_lt("sup-dist to reference limit", spread, 1e-6);
    r.check_finite("gradient bound C", gb.C);
    if (!o.csv.empty()) {
        std::ofstream f(o.csv);
        if (!f) throw InputError("cannot write " + o.csv);
        write_dist_csv(f, run.map, ref.map);
    }
}

void cmd_higgs(ReportDocument& r, Inputs& in, const std::string& path, const std::vector<double>& ladder) {
    const ModelMetric m = load_model(r, in, path);
    const ResidueResult res = residue(m, ladder);
    r.data["residue"] = matrix_to_json(res.R);
    r.data["scale"] = {number(res.scale.real()), number(res.scale.imag())};
    r.data["residue_profile"] = profile_json(res.profile);
    r.data["extrapolation_spread"] = number(res.extrapolation_spread);
    r.check_true("residue profile equals the profile of N", res.profile == m.sl2().profile);
    if (res.R.norm() > 0.0) {
        r.check_lt("residue nilpotency", res.nilpotency, 1e-10);
        r.check_lt("proportionality to a conjugate of N", res.proportionality_err, 1e-2);
    }
    std::vector<PuncturedPoint> pts;
    for (double y : ladder)
        for (double x : {0.0, 1.0, 4.0}) pts.push_back({x, y});
    const HiggsNormReport norm = higgs_norm_check(extract_higgs(m, pts));
    r.data["norm_values"] = norm.values;
    r.check_finite("sup |theta|", norm.sup);
    r.check_true("|theta| non-increasing in y", norm.non_increasing);
}

void cmd_kahler(ReportDocument& r, Inputs& in, const std::string& path, const std::vector<int>& grids, int trials,
                unsigned long long seed) {
    const ModelMetric m = load_model(r, in, path);
    if (grids.size() < 2) throw InputError("--grids needs at least two sizes");
    if (trials < 1) throw InputError("--trials must be positive");
    const auto k = kahler_identity_check(
        [&](const KahlerGrid& g) { return OperatorQuad::from_model(m, g, KahlerBase::Poincare); }, grids, trials,
        seed);
    Json errs = Json::array();
    for (std::size_t g = 0; g < k.grids.size(); ++g) {
        double a = 0.0, b = 0.0, c = 0.0;
        for (const auto& e : k.errors[g]) {
            a = std::max(a, e.dbar_adjoint);
            b = std::max(b, e.d_adjoint);
            c = std::max(c, e.laplacian);
        }
        errs.push_back({{"grid", k.grids[g]}, {"dbar_adjoint", number(a)}, {"d_adjoint", number(b)},
                        {"laplacian", number(c)}});
    }
    r.conventions["base"] = "poincare";
    r.data["max_errors"] = errs;
    r.check_ge("order (D'')* = -i[Lambda, D']", k.min_order_dbar, 1.5);
    r.check_ge("order D* = i[Lambda, D^c]", k.min_order_d, 1.5);
    r.check_ge("order Delta = 2 Delta''", k.min_order_laplacian, 1.5);
    r.check_true("Laplacian error decreases on every trial", k.laplacian_monotone);
}

// {"sl2": payload} gives one variable; {"sl2": [a, b]} the product of two.
FiltrationData filtration_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("sl2")) throw InputError("missing field /sl2");
    const Json& s = j["sl2"];
    if (s.is_array()) {
        if (s.size() != 2) throw InputError("expected two sl2 payloads at /sl2");
        return FiltrationData::product(sl2_from_json(s[0], "/sl2/0"), sl2_from_json(s[1], "/sl2/1"));
    }
    return FiltrationData::from_sl2(sl2_from_json(s, "/sl2"));
}

void cmd_l2check(ReportDocument& r, Inputs& in, const std::string& path, double eps, const std::string& filt) {
    if (!(eps > 0.0 && eps < 1.0)) throw InputError("--eps must lie in (0,1)");
    const auto germs = germs_from_json(in.load("germs", path));
    std::optional<FiltrationData> f;
    if (!filt.empty()) f = filtration_from_json(in.load("filtration", filt));
    const FiltrationData* fp = f ? &*f : nullptr;
    r.conventions = {{"region", "L1, L2 > eps"}, {"norm", "(L1/L2)^l1 L2^l2"}};
    Json rows = Json::array();
    int agree = 0;
    for (std::size_t i = 0; i < germs.size(); ++i) {
        const GermExpression g = fp ? split_germ(germs[i], *fp) : germs[i];
        const L2Verdict v = is_l2(g, {eps}, fp);
        Json row = {{"germ", germ_to_json(g)}, {"member", v.member}, {"trace", v.trace}};
        if (v.rejected) {
            row["oracle"] = "not applicable: log powers";
            ++agree;
        } else {
            const NumericVerdict nv = is_l2_numeric(g, {eps}, {}, fp);
            row["oracle"] = {{"member", nv.member}, {"estimate", number(nv.estimate)}};
            if (nv.member == v.member) ++agree;
        }
        rows.push_back(row);
    }
    r.data["germs"] = rows;
    r.check_true("predicate agrees with the norm oracle", agree == static_cast<int>(germs.size()));
}

void cmd_dbar(ReportDocument& r, Inputs& in, int k, const std::string& rhs, const std::string& grid, double alpha,
              double tol) {
    const GridSize gs = parse_grid(grid, "--grid");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("--alpha must lie in (0,1)");
    const PolarGrid g(gs.a, gs.b, alpha);
    const ManufacturedCase c = rhs_from_json(in.load("rhs", rhs), g);
    r.conventions = {{"weight", "|sigma|^2 = L^k, L = -log r"}, {"metric", "Poincare"}};
    r.data["case"] = c.name;
    const DbarSolution s = solve_dbar({g, c.f}, {k, alpha});
    r.data["norm_u"] = number(s.norm_u);
    r.data["norm_f"] = number(s.norm_f);
    r.data["ratio"] = number(s.ratio);
    r.data["removed_constant"] = {number(s.removed_constant.real()), number(s.removed_constant.imag())};
    r.data["residual"] = number(s.residual);
    r.check_lt("residual |dbar u - f| / |f|", s.residual, tol);
    r.check_finite("weighted norm of u", s.norm_u);
}

void cmd_all(ReportDocument& r, unsigned long long seed, bool timing) {
    SuiteOptions opt;
    opt.seed = seed;
    opt.timing = timing;
    Json rows = Json::array();
    for (int id = 1; id <= kCriterionCount; ++id) {
        const CriterionResult c = run_criterion(id, opt);
        rows.push_back({{"id", id}, {"title", c.title}, {"summary", c.summary}, {"report", c.report.to_json()}});
        r.check_true(std::to_string(id) + " " + c.title, c.pass());
    }
    r.data["criteria"] = rows;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"hb: verification workbench for harmonic bundles", "hb"};
    app.require_subcommand(1);
    std::string out_path;
    unsigned long long seed = 1;
    bool timing = false;
    app.add_option("--out", out_path, "write the report here instead of standard output");
    app.add_option("--seed", seed, "seed for every random draw");
    app.add_flag("--timing", timing, "record wall time in the report");
    // Subcommands also accept the common options after their name.
    auto common = [&](CLI::App* s) {
        s->add_option("--out", out_path);
        s->add_option("--seed", seed);
        s->add_flag("--timing", timing);
    };

    std::string in_path, model_path, germs_path, rhs_path, filt_path;
    std::string ys = "10", ladder = "50,100,200,400", grids = "32,64,128", dbar_grid = "256x256";
    int samples = 200, trials = 20, k = 0;
    double y0 = 10.0, eps = 0.5, alpha = 0.5, dbar_tol = 1e-4;
    FlowOptions fo;
    bool perturb_given = false;

    auto* sl2 = app.add_subcommand("sl2", "sl2 triple and weight filtration of a monodromy");
    sl2->add_option("--in", in_path, "monodromy JSON: {\"gamma\"} or {\"N\"}")->required();
    auto* mod = app.add_subcommand("model", "sl2-orbit model metric");
    mod->add_option("--model", model_path)->required();
    mod->add_option("--y", ys, "comma-separated heights for the norm profile");
    mod->add_option("--samples", samples, "equivariance samples");
    auto* en = app.add_subcommand("energy", "total energy of the model near the puncture");
    en->add_option("--model", model_path)->required();
    en->add_option("--y0", y0);
    auto* fl = app.add_subcommand("flow", "harmonic map heat flow from a perturbed model");
    fl->add_option("--model", fo.model)->required();
    fl->add_option("--grid", fo.grid, "NXxNY");
    fl->add_option("--y0", fo.y0);
    fl->add_option("--y1", fo.y1);
    auto* po = fl->add_option("--perturb", fo.perturb, "perturbation seed");
    fl->add_option("--size", fo.size, "perturbation size");
    fl->add_option("--tol", fo.tol);
    fl->add_option("--csv", fo.csv, "dump dist to the reference limit per node");
    auto* hi = app.add_subcommand("higgs", "Higgs field residue and norm");
    hi->add_option("--model", model_path)->required();
    hi->add_option("--ladder", ladder);
    auto* ka = app.add_subcommand("kahler", "discrete Kahler identities on the model bundle");
    ka->add_option("--model", model_path)->required();
    ka->add_option("--grids", grids);
    ka->add_option("--trials", trials);
    auto* l2 = app.add_subcommand("l2check", "L2 membership of germs");
    l2->add_option("--germs", germs_path)->required();
    l2->add_option("--eps", eps);
    l2->add_option("--filtration", filt_path, "sl2 data for germs with coefficient vectors");
    auto* db = app.add_subcommand("dbar", "weighted dbar solve on the punctured disk");
    db->add_option("--k", k)->required();
    db->add_option("--rhs", rhs_path)->required();
    db->add_option("--grid", dbar_grid, "NRxNTHETA");
    db->add_option("--alpha", alpha);
    db->add_option("--tol", dbar_tol, "residual tolerance");
    auto* all = app.add_subcommand("all", "run the acceptance suite");
    for (auto* s : {sl2, mod, en, fl, hi, ka, l2, db, all}) common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    perturb_given = po->count() > 0;
    if (!perturb_given) fo.perturb = seed;

    CLI::App* sub = app.get_subcommands().front();
    ReportDocument r;
    r.command = sub->get_name();
    Inputs in;
    in.params = {{"seed", seed}};
    const auto start = std::chrono::steady_clock::now();
    try {
        const std::string name = sub->get_name();
        if (name == "sl2") {
            cmd_sl2(r, in, in_path);
        } else if (name == "model") {
            in.params.update({{"y", ys}, {"samples", samples}});
            cmd_model(r, in, model_path, parse_list<double>(ys, "--y"), samples, seed);
        } else if (name == "energy") {
            in.params["y0"] = y0;
            cmd_energy(r, in, model_path, y0);
        } else if (name == "flow") {
            in.params.update({{"grid", fo.grid}, {"y0", fo.y0}, {"y1", fo.y1}, {"perturb", fo.perturb},
                              {"size", fo.size}, {"tol", fo.tol}});
            cmd_flow(r, in, fo);
        } else if (name == "higgs") {
            in.params["ladder"] = ladder;
            cmd_higgs(r, in, model_path, parse_list<double>(ladder, "--ladder"));
        } else if (name == "kahler") {
            in.params.update({{"grids", grids}, {"trials", trials}});
            cmd_kahler(r, in, model_path, parse_list<int>(grids, "--grids"), trials, seed);
        } else if (name == "l2check") {
            in.params["eps"] = eps;
            cmd_l2check(r, in, germs_path, eps, filt_path);
        } else if (name == "dbar") {
            in.params.update({{"k", k}, {"grid", dbar_grid}, {"alpha", alpha}, {"tol", dbar_tol}});
            cmd_dbar(r, in, k, rhs_path, dbar_grid, alpha, dbar_tol);
        } else {
            cmd_all(r, seed, timing);
        }
    } catch (const InputError& e) {
        err << "hb: input error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        // A violated precondition of the mathematics is a failed check.
        r.check_true(e.what(), false);
    }
    r.inputs_digest = in.digest();
    r.data["parameters"] = in.params;
    if (timing) r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (out_path.empty()) {
        out << r.dump();
    } else {
        std::ofstream f(out_path);
        if (!f) {
            err << "hb: input error: cannot write " << out_path << '\n';
            return 2;
        }
        f << r.dump();
    }
    if (const Check* c = r.first_failure()) {
        err << "hb: check failed: " << c->name << '\n';
        return 1;
    }
    return 0;
}

}  // namespace hb
