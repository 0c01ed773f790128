#include "stvem/benchmarks.hpp"

#include "stvem/jet.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

namespace stvem {

namespace {

using std::numbers::pi;
using J = Jet2<Real>;

// Manufactured fields, templated so that Jet2 yields derivatives.

struct Ex1 {
    template <typename T> static std::array<T, 2> u(const T& x, const T& y)
    {
        using std::cos, std::sin;
        return {sin(2 * pi * x) * cos(2 * pi * y), -(cos(2 * pi * x) * sin(2 * pi * y))};
    }
    template <typename T> static T p(const T& x, const T& y)
    {
        using std::sin;
        return sin(2 * pi * x) * sin(2 * pi * y);
    }
    template <typename T> static T phi(const T& x, const T& y)
    {
        using std::exp;
        return T(15) - 15 * exp(-(x * y * (x - 1) * (y - 1)));
    }
    template <typename T> static T mu(const T& r)
    {
        const T s = T(1) - 0.5 * r;
        return T(1) / (s * s);
    }
    template <typename T> static T kappa(const T&, Real) { return T(1); }
};

struct Ex2 {
    template <typename T> static std::array<T, 2> u(const T& x, const T& y)
    {
        return {x * x * y * (1 - x) * (1 - y), -((2 * x - 3 * x * x) * (y * y / 2 - y * y * y / 3))};
    }
    template <typename T> static T p(const T& x, const T&) { return -100 * x * x + T(100.0 / 3.0); }
    template <typename T> static T phi(const T& x, const T& y) { return x * x * y * (1 - x) * (1 - y) + T(600); }
    template <typename T> static T mu(const T& r)
    {
        using std::sin;
        const T s = sin(r);
        return T(1) + r + s * s;
    }
    template <typename T> static T kappa(const T&, Real scale) { return T(scale); }
};

struct Ex3 {
    template <typename T> static std::array<T, 2> u(const T& x, const T& y)
    {
        return {2 * x * x * y * (2 * y - 1) * (y - 1) * (x - 1) * (x - 1),
                -(2 * x * y * y * (y - 1) * (y - 1) * (2 * x - 1) * (x - 1))};
    }
    template <typename T> static T p(const T& x, const T& y)
    {
        using std::exp;
        const T s = x - 0.5;
        return exp(y) * s * s * s;
    }
    template <typename T> static T phi(const T& x, const T& y) { return x * x + y * y * y * y; }
    template <typename T> static T mu(const T& r)
    {
        using std::exp;
        return exp(-r);
    }
    template <typename T> static T kappa(const T& r, Real scale)
    {
        using std::exp;
        return scale * exp(r);
    }
};

template <typename Case>
ExactSolution exact_solution()
{
    ExactSolution e;
    e.u = [](const Point& x) {
        const auto u = Case::u(x.x(), x.y());
        return Point(u[0], u[1]);
    };
    e.grad_u = [](const Point& x) {
        const auto u = Case::u(J::variable(x.x(), 0), J::variable(x.y(), 1));
        Matrix2 g;
        g.row(0) = u[0].g.transpose();
        g.row(1) = u[1].g.transpose();
        return g;
    };
    e.p = [](const Point& x) { return Case::p(x.x(), x.y()); };
    e.phi = [](const Point& x) { return Case::phi(x.x(), x.y()); };
    e.grad_phi = [](const Point& x) { return Point(Case::phi(J::variable(x.x(), 0), J::variable(x.y(), 1)).g); };
    return e;
}

template <typename Case>
Sources manufactured_sources(Real kappa_scale)
{
    Sources s;
    s.momentum = [](const Point& pt) {
        const J x = J::variable(pt.x(), 0), y = J::variable(pt.y(), 1);
        const auto u = Case::u(x, y);
        const J p = Case::p(x, y);
        const J phi = Case::phi(x, y);
        const J mu = Case::mu(phi);
        Point f;
        for (int i = 0; i < 2; ++i) {
            Real div_eps = 0, grad_mu_eps = 0;
            for (int j = 0; j < 2; ++j) {
                const Real eps_ij = 0.5 * (u[static_cast<std::size_t>(i)].g(j) + u[static_cast<std::size_t>(j)].g(i));
                div_eps += 0.5 * (u[static_cast<std::size_t>(i)].H(j, j) + u[static_cast<std::size_t>(j)].H(i, j));
                grad_mu_eps += mu.g(j) * eps_ij;
            }
            f(i) = -(mu.v * div_eps + grad_mu_eps) + p.g(i);
        }
        return f;
    };
    s.heat = [kappa_scale](const Point& pt) {
        const J x = J::variable(pt.x(), 0), y = J::variable(pt.y(), 1);
        const auto u = Case::u(x, y);
        const J phi = Case::phi(x, y);
        const J kappa = Case::kappa(phi, kappa_scale);
        const Real lap = phi.H.trace();
        return -(kappa.v * lap + kappa.g.dot(phi.g)) + u[0].v * phi.g(0) + u[1].v * phi.g(1);
    };
    return s;
}

Real default_kappa(CaseId id)
{
    switch (id) {
    case CaseId::ex1: return 1;
    case CaseId::ex2_diffusive: return 1;
    case CaseId::ex2_convective: return 1e-6;
    case CaseId::ex3: return 1e-3;
    case CaseId::ex4_mild: return 1e-6;
    case CaseId::ex4_strong: return 1e-9;
    }
    return 1;
}

Coefficient sampled_coefficient(std::function<Real(Real)> f, Real lo, Real hi)
{
    Real mn = f(lo), mx = mn;
    for (int i = 0; i <= 400; ++i) {
        const Real v = f(lo + (hi - lo) * i / 400.0);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    return {std::move(f), mn, mx, false};
}

template <typename Case>
void fill_manufactured(BenchmarkCase& bc, Real alpha, Real kappa_scale, Real phi_lo, Real phi_hi, bool kappa_varies)
{
    auto& s = bc.spec;
    s.phi_min = phi_lo;
    s.phi_max = phi_hi;
    s.mu = sampled_coefficient([](Real r) { return Case::mu(r); }, phi_lo, phi_hi);
    s.kappa = kappa_varies ? sampled_coefficient([kappa_scale](Real r) { return Case::kappa(r, kappa_scale); }, phi_lo, phi_hi)
                           : Coefficient::constant_value(kappa_scale);
    // The whole momentum load goes into the fixed source, so f = 0.
    s.alpha = alpha;
    s.buoyancy = [](const Point&) { return Point(0, 0); };
    const Sources src = manufactured_sources<Case>(kappa_scale);
    s.fixed_source = src.momentum;
    s.heat_source = src.heat;
    const ExactSolution ex = exact_solution<Case>();
    bc.exact = ex;
    bc.phi_reference = ex.phi;
    BoundaryCondition all;
    all.velocity = ex.u;
    all.temperature = ex.phi;
    s.boundary["*"] = all;
}

// c1 ~ 0.1 mu_ref (grad-div), c2 ~ 0.01 / mu_ref (pressure), c3 ~ U_ref (temperature streamline).
void set_stabilization(ProblemSpec& s, Real mu_ref, Real u_ref)
{
    s.c1 = 0.1 * mu_ref;
    s.c2 = 0.01 / mu_ref;
    s.c3 = u_ref;
    s.convection = ConvectionForm::advective;
}

}  // namespace

CaseId parse_case(const std::string& name)
{
    static const std::map<std::string, CaseId> names{
        {"ex1", CaseId::ex1},           {"ex2_diffusive", CaseId::ex2_diffusive}, {"ex2_convective", CaseId::ex2_convective},
        {"ex3", CaseId::ex3},           {"ex4_mild", CaseId::ex4_mild},           {"ex4_strong", CaseId::ex4_strong}};
    const auto it = names.find(name);
    if (it == names.end()) throw ConfigError("unknown case '" + name + "'");
    return it->second;
}

std::string to_string(CaseId id)
{
    switch (id) {
    case CaseId::ex1: return "ex1";
    case CaseId::ex2_diffusive: return "ex2_diffusive";
    case CaseId::ex2_convective: return "ex2_convective";
    case CaseId::ex3: return "ex3";
    case CaseId::ex4_mild: return "ex4_mild";
    case CaseId::ex4_strong: return "ex4_strong";
    }
    return "?";
}

BenchmarkCase make_case(CaseId id, std::optional<Real> kappa)
{
    BenchmarkCase bc;
    bc.id = id;
    bc.name = to_string(id);
    bc.domain = Domain::unit_square();
    const Real kap = kappa.value_or(default_kappa(id));
    const std::vector<Real> square_h{1.0 / 5, 1.0 / 10, 1.0 / 20, 1.0 / 40, 1.0 / 80};
    switch (id) {
    case CaseId::ex1:
        // phi lies in [0, 0.91]; mu has a pole at 2.
        fill_manufactured<Ex1>(bc, 1, kap, -0.5, 1.5, false);
        set_stabilization(bc.spec, 1, 1);
        bc.families = {MeshFamily::voronoi, MeshFamily::distorted_square};
        bc.h_list = square_h;
        bc.orders = {1, 2};
        break;
    case CaseId::ex2_diffusive:
    case CaseId::ex2_convective:
        // The first iterate runs with mu(0) and overshoots the exact range noticeably.
        fill_manufactured<Ex2>(bc, 1, kap, -1, 1500, false);
        // max |u| is about 0.17.
        set_stabilization(bc.spec, Ex2::mu(600.0), 0.17);
        bc.families = {MeshFamily::nonconvex, MeshFamily::uniform_square};
        bc.h_list = square_h;
        bc.orders = {1, 2};
        break;
    case CaseId::ex3:
        fill_manufactured<Ex3>(bc, 1, kap, -1, 3, true);
        set_stabilization(bc.spec, 1, 0.01);
        bc.families = {MeshFamily::distorted_square};
        bc.h_list = square_h;
        bc.orders = {1, 2};
        break;
    case CaseId::ex4_mild:
    case CaseId::ex4_strong: {
        const Real mu = id == CaseId::ex4_mild ? 1e-2 : 1e-4;
        bc.domain = Domain::channel_step();
        auto& s = bc.spec;
        // -mu lap u equals -div(2 mu eps(u)) for solenoidal u.
        s.mu = Coefficient::constant_value(2 * mu);
        s.kappa = Coefficient::constant_value(kap);
        s.alpha = 0;
        set_stabilization(s, 2 * mu, 1);
        BoundaryCondition in, out, wall;
        in.velocity = [](const Point& x) { return Point(0.5 * x.y() * (2 - x.y()), 0); };
        in.temperature = [](const Point&) { return Real(1); };
        out.velocity = [](const Point& x) { return Point(4 * (x.y() - 1) * (2 - x.y()), 0); };
        wall.velocity = [](const Point&) { return Point(0, 0); };
        s.boundary["left"] = in;
        s.boundary["right"] = out;
        s.boundary["*"] = wall;
        bc.phi_reference = [](const Point&) { return Real(1); };
        bc.families = {MeshFamily::triangular};
        bc.h_list = id == CaseId::ex4_mild ? std::vector<Real>{1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}
                                           : std::vector<Real>{1.0 / 4, 1.0 / 8, 1.0 / 16};
        bc.orders = {id == CaseId::ex4_mild ? 1 : 2};
        bc.initial = InitialGuess::stokes_first;
        break;
    }
    }
    return bc;
}

Sources make_sources(CaseId id, std::optional<Real> kappa)
{
    const Real kap = kappa.value_or(default_kappa(id));
    switch (id) {
    case CaseId::ex1: return manufactured_sources<Ex1>(kap);
    case CaseId::ex2_diffusive:
    case CaseId::ex2_convective: return manufactured_sources<Ex2>(kap);
    case CaseId::ex3: return manufactured_sources<Ex3>(kap);
    case CaseId::ex4_mild:
    case CaseId::ex4_strong: break;
    }
    Sources s;
    s.momentum = [](const Point&) { return Point(0, 0); };
    s.heat = [](const Point&) { return Real(0); };
    return s;
}

void apply_overrides(BenchmarkCase& bc, const CaseOverrides& o)
{
    if (o.kappa) bc = make_case(bc.id, o.kappa);
    if (o.h_list) bc.h_list = *o.h_list;
    if (o.orders) bc.orders = *o.orders;
    if (o.families) bc.families = *o.families;
    if (o.c1) bc.spec.c1 = *o.c1;
    if (o.c2) bc.spec.c2 = *o.c2;
    if (o.c3) bc.spec.c3 = *o.c3;
    if (o.convection) bc.spec.convection = *o.convection;
    if (o.no_stab) bc.spec.stabilized = false;
    for (Real h : bc.h_list)
        if (!(h > 0)) throw ConfigError("mesh sizes must be positive");
    for (int k : bc.orders)
        if (k < 1 || k > 3) throw ConfigError("order must lie in 1..3");
}

CaseRun run_single(const BenchmarkCase& bc, const PolyMesh& mesh, MeshFamily family, int k, Real h,
                   const PicardOptions& opts)
{
    const auto start = std::chrono::steady_clock::now();
    ProblemSpec spec = bc.spec;
    spec.k = k;
    PicardOptions o = opts;
    o.initial = bc.initial;
    CaseRun run;
    run.disc = discretize(mesh, k, spec.quad_degree, o.threads);
    const Discretization& disc = run.disc;
    PicardResult res = picard_solve(spec, disc, o);

    auto& r = run.record;
    r.case_name = bc.name;
    r.family = to_string(family);
    r.k = k;
    r.h = h;
    if (bc.exact) {
        r.errors = compute_errors(res.state, *bc.exact, disc);
    } else {
        // No exact velocity or pressure: only temperature diagnostics apply.
        const Real nan = std::numeric_limits<Real>::quiet_NaN();
        r.errors.E_u_H1 = r.errors.E_u_L2 = r.errors.E_p_L2 = r.errors.E_phi_H1 = r.errors.E_phi_L2 = nan;
        r.errors.div_violation = divergence_violation(res.state.u, disc);
        std::tie(r.errors.phi_min_dev, r.errors.phi_max_dev) = nodal_extremes(res.state.phi, disc, bc.phi_reference);
    }
    r.iterations = res.report.iterations;
    r.converged = res.report.converged;
    r.wall_time = std::chrono::duration<Real>(std::chrono::steady_clock::now() - start).count();
    run.report = std::move(res.report);
    run.state = std::move(res.state);
    return run;
}

std::vector<ConvergenceRecord> run_case(const BenchmarkCase& bc, const CaseOverrides& overrides)
{
    BenchmarkCase c = bc;
    apply_overrides(c, overrides);
    for (std::size_t i = 0; i < c.h_list.size(); ++i)
        if (!(c.h_list[i] > 0) || (i > 0 && !(c.h_list[i] < c.h_list[i - 1])))
            throw ConfigError("h list must be positive and strictly decreasing");
    PicardOptions opts;
    opts.tol = overrides.tol;
    opts.max_iter = overrides.max_iter;
    opts.threads = overrides.threads;
    std::vector<ConvergenceRecord> out;
    for (MeshFamily fam : c.families)
        for (int k : c.orders)
            for (Real h : c.h_list) {
                const PolyMesh mesh = generate_mesh(fam, c.domain, h, overrides.seed);
                out.push_back(run_single(c, mesh, fam, k, h, opts).record);
            }
    return out;
}

std::vector<ConvergenceRecord> run_case(CaseId id, const CaseOverrides& overrides)
{
    return run_case(make_case(id, overrides.kappa), overrides);
}

std::string records_csv(const std::vector<ConvergenceRecord>& records)
{
    std::ostringstream os;
    os << "case,family,k,h,E_u_H1,rate,E_u_L2,rate,E_p_L2,rate,E_phi_H1,rate,E_phi_L2,rate,"
          "div_violation,phi_min_dev,phi_max_dev,iterations,converged\n";
    os << std::setprecision(6);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const bool has_prev = i > 0 && records[i - 1].case_name == r.case_name && records[i - 1].family == r.family &&
                              records[i - 1].k == r.k && records[i - 1].h > r.h;
        const std::array<Real, 5> e{r.errors.E_u_H1, r.errors.E_u_L2, r.errors.E_p_L2, r.errors.E_phi_H1, r.errors.E_phi_L2};
        std::array<Real, 5> rate{};
        if (has_prev) {
            const auto& q = records[i - 1];
            const std::array<Real, 5> ep{q.errors.E_u_H1, q.errors.E_u_L2, q.errors.E_p_L2, q.errors.E_phi_H1, q.errors.E_phi_L2};
            for (std::size_t n = 0; n < 5; ++n) rate[n] = observed_rate(ep[n], e[n], q.h, r.h);
        }
        os << r.case_name << ',' << r.family << ',' << r.k << ',' << std::defaultfloat << r.h;
        for (std::size_t n = 0; n < 5; ++n) {
            os << ',' << std::scientific << std::setprecision(4) << e[n] << ',';
            if (has_prev) os << std::fixed << std::setprecision(2) << rate[n];
        }
        os << std::scientific << std::setprecision(4) << ',' << r.errors.div_violation << ',' << r.errors.phi_min_dev << ','
           << r.errors.phi_max_dev << ',' << r.iterations << ',' << (r.converged ? "true" : "false") << '\n';
    }
    return os.str();
}

}  // namespace stvem
