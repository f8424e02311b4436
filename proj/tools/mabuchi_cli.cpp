// mabuchi: command-line front end for the experiments and the basic operations.
//
// Exit codes: 0 all assertions pass, 1 an assertion failed, 2 usage or I/O error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mabuchi/experiments.hpp"

namespace {

using namespace mabuchi;
namespace fs = std::filesystem;

constexpr const char* kOutEnv = "MABUCHI_OUT";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::map<std::string, double> parse_tolerances(const std::vector<std::string>& items) {
    std::map<std::string, double> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--tol expects name=value, got '" + item + "'");
        try {
            std::size_t used = 0;
            const auto text = item.substr(eq + 1);
            const double v = std::stod(text, &used);
            if (used != text.size() || !(v >= 0.0)) throw std::invalid_argument("");
            out[item.substr(0, eq)] = v;
        } catch (const std::logic_error&) {
            throw UsageError("--tol value must be a nonnegative number: '" + item + "'");
        }
    }
    return out;
}

// Config file values first; flags given on the command line win.
void apply_config_file(const std::string& path, ExperimentConfig& cfg) {
    std::ifstream is(path);
    if (!is) throw UsageError("cannot open config file " + path);
    nlohmann::json j;
    try {
        is >> j;
        if (j.contains("n")) cfg.n = j.at("n").get<std::size_t>();
        if (j.contains("time_samples")) cfg.time_samples = j.at("time_samples").get<std::size_t>();
        if (j.contains("m")) cfg.m = j.at("m").get<std::size_t>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
        if (j.contains("steepness_sweep")) cfg.steepness_sweep = j.at("steepness_sweep").get<bool>();
        if (j.contains("tol"))
            for (const auto& [k, v] : j.at("tol").items()) cfg.tol[k] = v.get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("malformed config file " + path + ": " + e.what());
    }
}

int run_command(const std::vector<std::string>& names, const ExperimentConfig& base) {
    std::vector<std::string> todo = names;
    if (todo.size() == 1 && todo[0] == "all") {
        todo.clear();
        for (const auto& [name, fn] : experiments()) todo.push_back(name);
    }
    for (const auto& name : todo)
        if (!experiments().count(name)) throw UsageError("unknown experiment: " + name);

    bool ok = true;
    std::set<std::string> used;
    for (const auto& name : todo) {
        auto cfg = base;
        cfg.experiment = name;
        const auto res = run_experiment(cfg);
        const auto dir = write_experiment(res, cfg.out);
        std::cout << res.summary_csv();
        std::cout << "# artifacts: " << dir.string() << "\n";
        used.insert(res.used_overrides.begin(), res.used_overrides.end());
        if (!res.pass()) {
            ok = false;
            for (const auto& a : res.assertions)
                if (!a.pass()) std::cerr << "assertion failed: " << name << '.' << a.name << '\n';
        }
    }
    for (const auto& [k, v] : base.tol)
        if (!used.count(k)) std::cerr << "warning: tolerance override '" << k << "' matched no assertion\n";
    return ok ? 0 : 1;
}

Potential1D load(const std::string& path) {
    try {
        return read_potential_csv(path);
    } catch (const std::exception& e) {
        throw UsageError(std::string("cannot read potential: ") + e.what());
    }
}

void emit(const std::string& text, const std::string& out_file) {
    if (out_file.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(out_file, std::ios::binary);
    if (!os) throw UsageError("cannot write " + out_file);
    os << text;
}

int distance_command(const std::string& a, const std::string& b, const std::string& out_file) {
    const auto u0 = load(a), u1 = load(b);
    if (!(u0.grid() == u1.grid())) throw UsageError("potentials live on different grids");
    if (!is_kahler(u0) || !is_kahler(u1)) throw UsageError("potentials must be Kähler (1 + u'' > 0)");
    std::ostringstream os;
    os << "p,value\n";
    for (double p : kExponentSweep) os << detail::fmt(p) << ',' << detail::fmt(d_p(u0, u1, p).value) << '\n';
    os << "inf," << detail::fmt(d_infinity(u0, u1)) << '\n';
    emit(os.str(), out_file);
    return 0;
}

int geodesic_command(const std::string& a, const std::string& b, std::size_t samples, const std::string& out_file) {
    const auto u0 = load(a), u1 = load(b);
    if (!(u0.grid() == u1.grid())) throw UsageError("potentials live on different grids");
    if (!is_kahler(u0) || !is_kahler(u1)) throw UsageError("potentials must be Kähler (1 + u'' > 0)");
    std::ostringstream os;
    write_geodesic_csv(os, connect(u0, u1, samples));
    emit(os.str(), out_file);
    return 0;
}

int classify_command(const std::string& map, std::size_t n, std::uint64_t seed, const std::string& out_file) {
    IsometryMap F;
    try {
        F = IsometryMap::parse(map);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    ExperimentConfig probe;
    probe.n = n;
    probe.validate();
    const CircleGrid g(n);
    const auto r = classify(F, g, seed);
    double g_error = 0.0;
    std::ostringstream csv;
    csv << "map,a_hat,b_hat,residual,g_error,conclusive\n" << classify_csv_row(map, F, r, g_error);
    std::cout << "map        " << F.name() << '\n'
              << "a_hat      " << detail::fmt(r.a_hat) << "  (rounded " << r.a_rounded() << ")\n"
              << "b_hat      " << detail::fmt(r.b_hat) << "  (rounded " << r.b_rounded() << ")\n"
              << "residual   " << detail::fmt(r.residual) << '\n'
              << "G error    " << detail::fmt(g_error) << '\n'
              << "conclusive " << (r.conclusive ? "yes" : "no") << '\n'
              << "note       " << r.note << '\n';
    if (F.interpolates(g)) std::cout << "warning    shift is not a grid node; pullback interpolates\n";
    std::ostringstream gcsv;
    gcsv << "x,G_x,expected\n";
    for (const auto& [x, y] : r.g_samples)
        gcsv << detail::fmt(x) << ',' << detail::fmt(y) << ',' << detail::fmt(F.expected_g(x)) << '\n';
    emit(csv.str() + "\n" + gcsv.str(), out_file);
    return r.conclusive ? 0 : 1;
}

int holomorphy_command(const std::string& map, std::size_t m, const std::string& out_file) {
    TorusMap2D g;
    try {
        // Compositions are written outer/inner.
        const auto slash = map.find('/');
        g = slash == std::string::npos
                ? TorusMap2D::parse(map)
                : compose(TorusMap2D::parse(map.substr(0, slash)), TorusMap2D::parse(map.substr(slash + 1)));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const auto r = holomorphy_check(g, m);
    std::cout << "map   " << g.name << "\nsign  " << to_string(r.sign) << "\nR+    " << detail::fmt(r.r_plus)
              << "\nR-    " << detail::fmt(r.r_minus) << '\n';
    std::ostringstream csv;
    csv << "k,l,kind,r_plus,r_minus\n";
    for (const auto& p : r.probes)
        csv << p.k << ',' << p.l << ',' << (p.sine ? "sin" : "cos") << ',' << detail::fmt(p.plus) << ','
            << detail::fmt(p.minus) << '\n';
    emit(csv.str(), out_file);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical experiments on the L2 geometry of Kähler potentials (invariant torus model)"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    std::vector<std::string> names, tol_items;
    std::string config_path, out_dir;

    auto* run = app.add_subcommand("run", "run experiments and write CSV artifacts");
    run->add_option("experiment", names, "experiment name(s) or 'all'")->required();
    auto* o_n = run->add_option("--n", cfg.n, "grid size (power of two)");
    auto* o_k = run->add_option("--time-samples", cfg.time_samples, "time intervals per geodesic");
    auto* o_m = run->add_option("--m", cfg.m, "2D grid size for holomorphy");
    auto* o_seed = run->add_option("--seed", cfg.seed, "RNG seed");
    run->add_option("--tol", tol_items, "tolerance override name=value (repeatable)");
    auto* o_out = run->add_option("--out", out_dir, "output directory");
    auto* o_sweep = run->add_flag("--steepness-sweep", cfg.steepness_sweep, "fine steepness sweep for 'extend'");
    run->add_option("--config", config_path, "JSON config; command-line flags take precedence");

    std::string a, b, out_file, map;
    std::size_t dist_samples = 64, cls_n = 1024, holo_m = 128;
    std::uint64_t cls_seed = 1;

    auto* dist = app.add_subcommand("distance", "d_p table for two potential CSV files");
    dist->add_option("u0", a)->required();
    dist->add_option("u1", b)->required();
    dist->add_option("--out", out_file, "output CSV (default stdout)");

    auto* geo = app.add_subcommand("geodesic", "tabulate the geodesic between two potential CSV files");
    geo->add_option("u0", a)->required();
    geo->add_option("u1", b)->required();
    geo->add_option("--time-samples", dist_samples, "time intervals")->check(CLI::Range(2, 100000));
    geo->add_option("--out", out_file, "output CSV (default stdout)");

    auto* cls = app.add_subcommand("classify", "estimate (a, b, G) for flip, pullback:s,a or compose:A/B");
    cls->add_option("map", map)->required();
    cls->add_option("--n", cls_n, "grid size");
    cls->add_option("--seed", cls_seed, "RNG seed");
    cls->add_option("--out", out_file, "output CSV (default stdout)");

    auto* holo = app.add_subcommand("holomorphy", "sign test for translation, rotation, conjugation, shear, quarter-turn");
    holo->add_option("map", map)->required();
    holo->add_option("--m", holo_m, "2D grid size")->check(CLI::Range(8, 4096));
    holo->add_option("--out", out_file, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            if (!config_path.empty()) {
                ExperimentConfig file_cfg;
                apply_config_file(config_path, file_cfg);
                if (!o_n->count()) cfg.n = file_cfg.n;
                if (!o_k->count()) cfg.time_samples = file_cfg.time_samples;
                if (!o_m->count()) cfg.m = file_cfg.m;
                if (!o_seed->count()) cfg.seed = file_cfg.seed;
                if (!o_sweep->count()) cfg.steepness_sweep = file_cfg.steepness_sweep;
                cfg.out = file_cfg.out;
                cfg.tol = file_cfg.tol;
            }
            for (const auto& [k, v] : parse_tolerances(tol_items)) cfg.tol[k] = v;
            if (o_out->count()) cfg.out = out_dir;
            else if (const char* env = std::getenv(kOutEnv); env && *env) cfg.out = env;
            try {
                cfg.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            return run_command(names, cfg);
        }
        if (dist->parsed()) return distance_command(a, b, out_file);
        if (geo->parsed()) return geodesic_command(a, b, dist_samples, out_file);
        if (cls->parsed()) return classify_command(map, cls_n, cls_seed, out_file);
        if (holo->parsed()) return holomorphy_command(map, holo_m, out_file);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
