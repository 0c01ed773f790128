#include "cli.hpp"

#include "stvem/benchmarks.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace stvem {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// "1/16" or "0.0625".
Real parse_size(const std::string& token)
{
    try {
        std::size_t used = 0;
        const auto slash = token.find('/');
        Real v = 0;
        if (slash == std::string::npos) {
            v = std::stod(token, &used);
            if (used != token.size()) throw ConfigError("");
        } else {
            const Real num = std::stod(token.substr(0, slash), &used);
            if (used != slash) throw ConfigError("");
            const std::string den_str = token.substr(slash + 1);
            const Real den = std::stod(den_str, &used);
            if (used != den_str.size() || den == 0) throw ConfigError("");
            v = num / den;
        }
        if (!(v > 0)) throw ConfigError("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid mesh size '" + token + "' (expected e.g. 1/16 or 0.0625)");
    }
}

std::vector<std::string> split(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

int parse_order(const std::string& s)
{
    try {
        std::size_t used = 0;
        const int k = std::stoi(s, &used);
        if (used != s.size()) throw ConfigError("");
        return k;
    } catch (const std::exception&) {
        throw ConfigError("invalid order '" + s + "'");
    }
}

ConvectionForm parse_convection(const std::string& s)
{
    if (s == "skew") return ConvectionForm::skew;
    if (s == "advective") return ConvectionForm::advective;
    throw ConfigError("unknown convection form '" + s + "' (skew or advective)");
}

ExportFormat parse_format(const std::string& s)
{
    if (s == "vtk") return ExportFormat::vtk_legacy;
    if (s == "csv") return ExportFormat::csv;
    throw ConfigError("unknown export format '" + s + "' (vtk or csv)");
}

/// Raw option strings, filled from the JSON config first and the command line second.
struct Settings {
    std::string case_name;
    std::string orders;
    std::string families;
    std::string h_list;
    std::string h;
    std::optional<Real> tau1, tau2, tau3, kappa;
    std::optional<Real> tol;
    std::optional<int> max_iter, threads;
    std::optional<unsigned> seed;
    std::string convection;
    std::string out_dir;
    std::string out;
    std::string format = "vtk";
    std::string domain = "unit_square";
    bool no_stab = false;
    std::string config;
};

template <typename T>
T json_get(const json& j, const std::string& key)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

std::string json_list(const json& j, const std::string& key)
{
    const json& v = j.at(key);
    if (!v.is_array()) return v.is_string() ? v.get<std::string>() : v.dump();
    std::string s;
    for (const auto& item : v) {
        if (!s.empty()) s += ',';
        s += item.is_string() ? item.get<std::string>() : item.dump();
    }
    return s;
}

void load_config(const std::string& path, Settings& s)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config '" + path + "' must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "case") s.case_name = json_get<std::string>(j, key);
        else if (key == "order" || key == "orders") s.orders = json_list(j, key);
        else if (key == "mesh_family" || key == "mesh_families") s.families = json_list(j, key);
        else if (key == "h_list") s.h_list = json_list(j, key);
        else if (key == "h") s.h = json_list(j, key);
        else if (key == "tau1") s.tau1 = json_get<Real>(j, key);
        else if (key == "tau2") s.tau2 = json_get<Real>(j, key);
        else if (key == "tau3") s.tau3 = json_get<Real>(j, key);
        else if (key == "kappa") s.kappa = json_get<Real>(j, key);
        else if (key == "tol") s.tol = json_get<Real>(j, key);
        else if (key == "max_iter") s.max_iter = json_get<int>(j, key);
        else if (key == "threads") s.threads = json_get<int>(j, key);
        else if (key == "seed") s.seed = json_get<unsigned>(j, key);
        else if (key == "convection") s.convection = json_get<std::string>(j, key);
        else if (key == "out_dir") s.out_dir = json_get<std::string>(j, key);
        else if (key == "format") s.format = json_get<std::string>(j, key);
        else if (key == "domain") s.domain = json_get<std::string>(j, key);
        else if (key == "no_stab") s.no_stab = json_get<bool>(j, key);
        else throw ConfigError("unknown config key '" + key + "'");
    }
}

/// Options shared by solve, study and export. Command-line values override the config file.
void add_problem_options(CLI::App& app, Settings& s)
{
    app.add_option("--config", s.config, "JSON config file");
    app.add_option("--case", s.case_name, "ex1, ex2_diffusive, ex2_convective, ex3, ex4_mild, ex4_strong");
    app.add_option("--order", s.orders, "VEM order(s), comma separated");
    app.add_option("--mesh-family", s.families, "uniform_square, distorted_square, voronoi, nonconvex, triangular");
    app.add_option("--tau1", s.tau1, "grad-div constant c1");
    app.add_option("--tau2", s.tau2, "pressure constant c2");
    app.add_option("--tau3", s.tau3, "temperature constant c3");
    app.add_option("--kappa", s.kappa, "conductivity scale");
    app.add_option("--convection", s.convection, "skew or advective");
    app.add_option("--tol", s.tol, "Picard tolerance (default 1e-7)");
    app.add_option("--max-iter", s.max_iter, "Picard iteration cap (default 50)");
    app.add_option("--threads", s.threads, "worker threads");
    app.add_option("--seed", s.seed, "mesh generator seed");
    app.add_option("--out-dir", s.out_dir, "directory for written files");
    app.add_flag("--no-stab", s.no_stab, "set all stabilization parameters to zero");
}

/// Merge config and command line: the command line wins for every option it set.
Settings resolve(const CLI::App& app, const Settings& cli)
{
    Settings s;
    if (!cli.config.empty()) load_config(cli.config, s);
    auto given = [&](const char* name) {
        const CLI::Option* opt = app.get_option_no_throw(name);
        return opt && opt->count() > 0;
    };
    if (given("--case")) s.case_name = cli.case_name;
    if (given("--order")) s.orders = cli.orders;
    if (given("--mesh-family")) s.families = cli.families;
    if (given("--h-list")) s.h_list = cli.h_list;
    if (given("--mesh-size")) s.h = cli.h;
    if (given("--tau1")) s.tau1 = cli.tau1;
    if (given("--tau2")) s.tau2 = cli.tau2;
    if (given("--tau3")) s.tau3 = cli.tau3;
    if (given("--kappa")) s.kappa = cli.kappa;
    if (given("--convection")) s.convection = cli.convection;
    if (given("--tol")) s.tol = cli.tol;
    if (given("--max-iter")) s.max_iter = cli.max_iter;
    if (given("--threads")) s.threads = cli.threads;
    if (given("--seed")) s.seed = cli.seed;
    if (given("--out-dir")) s.out_dir = cli.out_dir;
    if (given("--out")) s.out = cli.out;
    if (given("--format")) s.format = cli.format;
    if (given("--domain")) s.domain = cli.domain;
    if (given("--no-stab")) s.no_stab = cli.no_stab;
    return s;
}

CaseOverrides overrides_from(const Settings& s)
{
    CaseOverrides o;
    if (!s.orders.empty()) {
        std::vector<int> ks;
        for (const auto& t : split(s.orders)) ks.push_back(parse_order(t));
        o.orders = ks;
    }
    if (!s.families.empty()) {
        std::vector<MeshFamily> fams;
        for (const auto& t : split(s.families)) {
            fams.push_back(parse_mesh_family(t));
        }
        o.families = fams;
    }
    if (!s.h_list.empty()) {
        std::vector<Real> hs;
        for (const auto& t : split(s.h_list)) hs.push_back(parse_size(t));
        for (std::size_t i = 1; i < hs.size(); ++i)
            if (!(hs[i] < hs[i - 1])) throw ConfigError("--h-list must be strictly decreasing");
        o.h_list = hs;
    }
    o.c1 = s.tau1;
    o.c2 = s.tau2;
    o.c3 = s.tau3;
    o.kappa = s.kappa;
    if (!s.convection.empty()) o.convection = parse_convection(s.convection);
    o.no_stab = s.no_stab;
    if (s.tol) {
        if (!(*s.tol > 0)) throw ConfigError("--tol must be positive");
        o.tol = *s.tol;
    }
    if (s.max_iter) {
        if (*s.max_iter < 1) throw ConfigError("--max-iter must be at least 1");
        o.max_iter = *s.max_iter;
    }
    if (s.threads) {
        if (*s.threads < 1) throw ConfigError("--threads must be at least 1");
        o.threads = *s.threads;
    }
    if (s.seed) o.seed = *s.seed;
    return o;
}

CaseId required_case(const Settings& s)
{
    if (s.case_name.empty()) throw ConfigError("--case is required");
    return parse_case(s.case_name);
}

void ensure_dir(const std::string& dir)
{
    if (dir.empty()) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    f << text;
}

std::string size_tag(Real h)
{
    std::ostringstream os;
    const Real inv = 1 / h;
    if (std::abs(inv - std::round(inv)) < 1e-9) os << std::llround(inv);
    else os << h;
    return os.str();
}

/// The single (family, k, h) point addressed by solve and export.
struct SinglePoint {
    BenchmarkCase bc;
    MeshFamily family;
    int k;
    Real h;
    PicardOptions opts;
    unsigned seed;
};

SinglePoint single_point(const Settings& s)
{
    SinglePoint sp{make_case(required_case(s), s.kappa), MeshFamily::uniform_square, 1, 0, {}, 42};
    CaseOverrides o = overrides_from(s);
    apply_overrides(sp.bc, o);
    if (sp.bc.orders.size() != 1 && !o.orders) sp.bc.orders.resize(1);
    if (sp.bc.orders.size() != 1) throw ConfigError("solve and export take a single --order");
    if (sp.bc.families.size() != 1 && !o.families) sp.bc.families.resize(1);
    if (sp.bc.families.size() != 1) throw ConfigError("solve and export take a single --mesh-family");
    if (s.h.empty()) throw ConfigError("--mesh-size is required");
    sp.family = sp.bc.families.front();
    sp.k = sp.bc.orders.front();
    sp.h = parse_size(s.h);
    sp.opts.tol = o.tol;
    sp.opts.max_iter = o.max_iter;
    sp.opts.threads = o.threads;
    sp.seed = o.seed;
    return sp;
}

int run_mesh_gen(const Settings& s, std::ostream& out)
{
    if (s.families.empty()) throw ConfigError("--mesh-family is required");
    if (s.h.empty()) throw ConfigError("--mesh-size is required");
    const MeshFamily fam = parse_mesh_family(s.families);
    Domain dom;
    if (s.domain == "unit_square") dom = Domain::unit_square();
    else if (s.domain == "channel_step") dom = Domain::channel_step();
    else throw ConfigError("unknown domain '" + s.domain + "' (unit_square or channel_step)");
    const PolyMesh mesh = generate_mesh(fam, dom, parse_size(s.h), s.seed.value_or(42));
    if (s.out.empty()) {
        out << mesh_to_json(mesh);
        return exit_ok;
    }
    write_mesh(mesh, s.out);
    out << "wrote " << s.out << ": " << mesh.num_cells() << " cells, " << mesh.num_vertices() << " vertices, h = " << mesh.h()
        << '\n';
    return exit_ok;
}

int run_solve(const Settings& s, std::ostream& out, bool export_only)
{
    const SinglePoint sp = single_point(s);
    const PolyMesh mesh = generate_mesh(sp.family, sp.bc.domain, sp.h, sp.seed);
    const CaseRun run = run_single(sp.bc, mesh, sp.family, sp.k, sp.h, sp.opts);
    const ExportFormat fmt = parse_format(s.format);
    std::string target = s.out;
    if (target.empty() && !s.out_dir.empty()) {
        ensure_dir(s.out_dir);
        target = (fs::path(s.out_dir) / (sp.bc.name + "_k" + std::to_string(sp.k) + "_" + to_string(sp.family) + "_h" +
                                         size_tag(sp.h) + (fmt == ExportFormat::csv ? ".csv" : ".vtk")))
                     .string();
    }
    if (export_only && target.empty()) throw ConfigError("export needs --out or --out-dir");
    if (!target.empty()) export_fields(run.state, run.disc, target, fmt);
    if (!export_only) out << records_csv({run.record});
    else out << "wrote " << target << '\n';
    return run.record.converged ? exit_ok : exit_not_converged;
}

int run_study(const Settings& s, std::ostream& out)
{
    BenchmarkCase bc = make_case(required_case(s), s.kappa);
    const CaseOverrides o = overrides_from(s);
    const auto records = run_case(bc, o);
    const std::string csv = records_csv(records);
    out << csv;
    if (!s.out_dir.empty()) {
        ensure_dir(s.out_dir);
        write_text(fs::path(s.out_dir) / (bc.name + "_study.csv"), csv);
    }
    for (const auto& r : records)
        if (!r.converged) return exit_not_converged;
    return exit_ok;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Stabilized virtual elements for Stokes-temperature problems", "stvem"};
    app.require_subcommand(1);

    Settings mesh_s, solve_s, study_s, export_s;

    auto* mesh = app.add_subcommand("mesh", "mesh utilities");
    mesh->require_subcommand(1);
    auto* gen = mesh->add_subcommand("gen", "generate a mesh and write it as JSON");
    gen->add_option("--mesh-family", mesh_s.families, "mesh family")->required();
    gen->add_option("--mesh-size", mesh_s.h, "target mesh size, e.g. 1/16")->required();
    gen->add_option("--domain", mesh_s.domain, "unit_square or channel_step");
    gen->add_option("--seed", mesh_s.seed, "generator seed");
    gen->add_option("--out", mesh_s.out, "output path (default: stdout)");

    auto* solve = app.add_subcommand("solve", "solve one case on one mesh and print its error record");
    add_problem_options(*solve, solve_s);
    solve->add_option("--mesh-size", solve_s.h, "mesh size, e.g. 1/16");
    solve->add_option("--format", solve_s.format, "field export format: vtk or csv");
    solve->add_option("--out", solve_s.out, "field export path");

    auto* study = app.add_subcommand("study", "convergence study; CSV with rates on stdout");
    add_problem_options(*study, study_s);
    study->add_option("--h-list", study_s.h_list, "mesh sizes, comma separated, e.g. 1/5,1/10");

    auto* exp = app.add_subcommand("export", "solve and write fields for plotting");
    add_problem_options(*exp, export_s);
    exp->add_option("--mesh-size", export_s.h, "mesh size, e.g. 1/16");
    exp->add_option("--format", export_s.format, "vtk or csv");
    exp->add_option("--out", export_s.out, "output path");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        err << app.help();
        return exit_config;
    }

    try {
        if (*gen) return run_mesh_gen(resolve(*gen, mesh_s), out);
        if (*solve) return run_solve(resolve(*solve, solve_s), out, false);
        if (*study) return run_study(resolve(*study, study_s), out);
        if (*exp) return run_solve(resolve(*exp, export_s), out, true);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_config;
}

int cli_main(int argc, char** argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace stvem
