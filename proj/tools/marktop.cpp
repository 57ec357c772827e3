// marktop: node/bound queries, scalar scans, matrix-function experiments and Toeplitz generation.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <marktop/marktop.hpp>

using namespace marktop;

namespace {

double parse_real(const std::string& s, const char* what)
{
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || errno == ERANGE || std::isnan(v))
        throw ConfigError(std::string("bad value for ") + what + ": " + s);
    return v;
}

std::vector<std::string> split(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty())
            out.push_back(item);
    return out;
}

std::vector<Rep> parse_reps(const std::string& s)
{
    std::vector<Rep> reps;
    for (const auto& r : split(s)) {
        if (r == "pfd")
            reps.push_back(Rep::PFD);
        else if (r == "bary")
            reps.push_back(Rep::Bary);
        else if (r == "thiele")
            reps.push_back(Rep::Thiele);
        else
            throw ConfigError("unknown representation " + r);
    }
    return reps;
}

std::vector<Case> parse_cases(const std::string& s)
{
    std::vector<Case> cases;
    for (const auto& c : split(s)) {
        if (c == "i")
            cases.push_back(Case::I);
        else if (c == "ii")
            cases.push_back(Case::II);
        else if (c == "iii")
            cases.push_back(Case::III);
        else if (c == "iv")
            cases.push_back(Case::IV);
        else
            throw ConfigError("unknown case " + c);
    }
    return cases;
}

struct SpecArgs {
    std::string kind = "invsqrt";
    std::string gamma = "-0.5";
    std::string alpha = "-inf";
    std::string beta = "0";

    void add(CLI::App* app)
    {
        app->add_option("--spec", kind, "invsqrt | log | power | worst")->capture_default_str();
        app->add_option("--gamma", gamma, "exponent of the power function")->capture_default_str();
        app->add_option("--spec-alpha", alpha, "alpha of the worst-case function")->capture_default_str();
        app->add_option("--spec-beta", beta, "beta of the worst-case function")->capture_default_str();
    }

    MarkovSpec build() const
    {
        if (kind == "invsqrt")
            return inv_sqrt_spec();
        if (kind == "log")
            return log_spec();
        if (kind == "power")
            return power_spec(parse_real(gamma, "gamma"));
        if (kind == "worst")
            return worst_case_spec(parse_real(alpha, "spec-alpha"), parse_real(beta, "spec-beta"));
        throw ConfigError("unknown spec " + kind);
    }
};

std::ostream& output(const std::string& path, std::ofstream& file)
{
    if (path.empty() || path == "-")
        return std::cout;
    file.open(path);
    if (!file)
        throw ConfigError("cannot write " + path);
    return file;
}

void cmd_nodes(const std::string& a, const std::string& b, const std::string& c, const std::string& d, int m)
{
    Geometry g = build_geometry(parse_real(a, "alpha"), parse_real(b, "beta"), parse_real(c, "c"), parse_real(d, "d"));
    NodeSet ns = optimal_nodes(g, m);
    std::printf("m = %d\n", m);
    for (double z : ns.nodes)
        std::printf("node %.17g\n", z);
    std::printf("eta_2m = %.6e\n", blaschke_eta(g, ns));
    std::printf("lambda^2m = %.6e\n", std::pow(g.lambda, 2.0 * m));
    std::printf("2rho^2m = %.6e\n", 2.0 * std::pow(g.rho, 2.0 * m));
    try {
        std::printf("apriori = %.6e\n", apriori_bound(g, m));
    } catch (const BoundInvalid&) {
        std::printf("apriori = invalid\n");
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Rational interpolation of Markov functions at Toeplitz-like matrix arguments"};
    app.require_subcommand(1);

    std::string alpha = "-inf", beta = "0", c = "0.5", d = "1";
    int m = 4;
    auto* nodes = app.add_subcommand("nodes", "optimal nodes, eta and bounds");
    nodes->add_option("--alpha", alpha)->capture_default_str();
    nodes->add_option("--beta", beta)->capture_default_str();
    nodes->add_option("--c", c)->capture_default_str();
    nodes->add_option("--d", d)->capture_default_str();
    nodes->add_option("--m", m)->capture_default_str();

    SpecArgs scan_spec;
    std::string scan_c = "0.5", scan_d = "1", scan_reps = "pfd,bary,thiele", scan_out;
    int m_min = 1, m_max = 20, points = 500;
    auto* scan = app.add_subcommand("scan", "scalar relative errors on cosine points");
    scan_spec.add(scan);
    scan->add_option("--c", scan_c)->capture_default_str();
    scan->add_option("--d", scan_d)->capture_default_str();
    scan->add_option("--m-min", m_min)->capture_default_str();
    scan->add_option("--m-max", m_max)->capture_default_str();
    scan->add_option("--reps", scan_reps)->capture_default_str();
    scan->add_option("--points", points)->capture_default_str();
    scan->add_option("--out", scan_out, "CSV path, stdout by default");

    SpecArgs mf_spec;
    std::string method = "direct", power = "-0.5", matrix = "random", file, lmin = "1", lmax = "100";
    std::string cases = "i", mf_reps = "pfd", solver = "lu", mf_out;
    long n = 64;
    std::uint64_t seed = 1;
    double kms_a = 0.5;
    int mf_mmax = 30, threads = 0;
    bool stop = false;
    auto* mf = app.add_subcommand("matfun", "matrix function experiments, one CSV row per degree");
    mf_spec.add(mf);
    mf->add_option("--method", method, "direct | log | power (inverse scaling and squaring)")->capture_default_str();
    mf->add_option("--power", power, "exponent for --method=power")->capture_default_str();
    mf->add_option("--matrix", matrix, "random | file | cosine | laplacian1d | kms")->capture_default_str();
    mf->add_option("--file", file, "Toeplitz file for --matrix=file");
    mf->add_option("--n", n)->capture_default_str();
    mf->add_option("--lmin", lmin, "target lambda_min, or c of the cosine diagonal")->capture_default_str();
    mf->add_option("--lmax", lmax, "target lambda_max, or d of the cosine diagonal")->capture_default_str();
    mf->add_option("--seed", seed)->capture_default_str();
    mf->add_option("--kms-a", kms_a)->capture_default_str();
    mf->add_option("--case", cases, "comma list of i, ii, iii, iv")->capture_default_str();
    mf->add_option("--reps", mf_reps)->capture_default_str();
    mf->add_option("--m-max", mf_mmax)->capture_default_str();
    mf->add_flag("--stop", stop, "stop at the degree chosen by the stopping rule");
    mf->add_option("--solver", solver, "lu | cg")->capture_default_str();
    mf->add_option("--threads", threads, "worker cap, overrides MARKTOP_THREADS");
    mf->add_option("--out", mf_out, "CSV path, stdout by default");

    std::string gen_kind = "random", gen_out, gen_lmin = "1", gen_lmax = "100";
    long gen_n = 64;
    std::uint64_t gen_seed = 1;
    double gen_a = 0.5;
    auto* gen = app.add_subcommand("gen", "write a Toeplitz matrix file");
    gen->add_option("--matrix", gen_kind, "random | laplacian1d | kms")->capture_default_str();
    gen->add_option("--n", gen_n)->capture_default_str();
    gen->add_option("--lmin", gen_lmin)->capture_default_str();
    gen->add_option("--lmax", gen_lmax)->capture_default_str();
    gen->add_option("--seed", gen_seed)->capture_default_str();
    gen->add_option("--kms-a", gen_a)->capture_default_str();
    gen->add_option("--out", gen_out, "file path, stdout by default");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*nodes) {
            cmd_nodes(alpha, beta, c, d, m);
        } else if (*scan) {
            auto rows = run_scan(scan_spec.build(), parse_real(scan_c, "c"), parse_real(scan_d, "d"), m_min, m_max,
                                 parse_reps(scan_reps), points);
            std::ofstream f;
            std::ostream& os = output(scan_out, f);
            os << scan_header() << '\n';
            for (const auto& r : rows)
                os << scan_row(r) << '\n';
        } else if (*mf) {
            ExperimentConfig cfg;
            cfg.spec = mf_spec.build();
            if (method == "direct")
                cfg.method = Method::Direct;
            else if (method == "log")
                cfg.method = Method::LogScaled;
            else if (method == "power")
                cfg.method = Method::PowerScaled;
            else
                throw ConfigError("unknown method " + method);
            cfg.gamma = parse_real(power, "power");
            auto& src = cfg.source;
            if (matrix == "random")
                src.kind = MatrixSource::Kind::Random;
            else if (matrix == "file")
                src.kind = MatrixSource::Kind::File;
            else if (matrix == "cosine")
                src.kind = MatrixSource::Kind::Cosine;
            else if (matrix == "laplacian1d")
                src.kind = MatrixSource::Kind::Laplacian;
            else if (matrix == "kms")
                src.kind = MatrixSource::Kind::Kms;
            else
                throw ConfigError("unknown matrix source " + matrix);
            src.path = file;
            src.n = n;
            src.lmin = parse_real(lmin, "lmin");
            src.lmax = parse_real(lmax, "lmax");
            src.seed = seed;
            src.kms_a = kms_a;
            cfg.cases = parse_cases(cases);
            cfg.reps = parse_reps(mf_reps);
            cfg.m_max = mf_mmax;
            cfg.run_to_m_max = !stop;
            if (solver != "lu" && solver != "cg")
                throw ConfigError("unknown solver " + solver);
            cfg.use_cg = solver == "cg";
            cfg.threads = threads;
            auto rows = run_experiment(cfg);
            std::ofstream f;
            std::ostream& os = output(mf_out, f);
            os << csv_header() << '\n';
            for (const auto& r : rows)
                os << csv_row(r) << '\n';
        } else if (*gen) {
            ToeplitzInput t;
            if (gen_kind == "random")
                t = gen_random_spd_toeplitz(gen_n, parse_real(gen_lmin, "lmin"), parse_real(gen_lmax, "lmax"), gen_seed);
            else if (gen_kind == "laplacian1d")
                t = laplacian1d(gen_n);
            else if (gen_kind == "kms")
                t = kms(gen_n, gen_a);
            else
                throw ConfigError("unknown matrix kind " + gen_kind);
            std::ofstream f;
            write_toeplitz(output(gen_out, f), t);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
