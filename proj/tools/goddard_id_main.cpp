#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "goddard/goddard.hpp"

namespace {

// Spec comes either as one positional name or as the five explicit flags.
struct RunCli {
    std::string name;
    std::optional<int> nv, nu, nm;
    std::optional<std::string> method;
    std::optional<double> dh;
};

int resolve_spec(const RunCli& cli, goddard::RunSpec& spec, std::ostream& err) {
    if (!cli.name.empty()) {
        try {
            spec = goddard::parse_runspec(cli.name);
        } catch (const std::invalid_argument& e) {
            err << "error: " << e.what() << "\n";
            return 1;
        }
        return 0;
    }
    if (!(cli.nv && cli.nu && cli.nm && cli.method && cli.dh)) {
        err << "error: give a run name or all of --nv --nu --nm --method --dh\n";
        return 1;
    }
    try {
        spec.nv = *cli.nv;
        spec.nu = *cli.nu;
        spec.nm = *cli.nm;
        spec.method = goddard::parse_method(*cli.method);
        spec.dh = *cli.dh;
        goddard::validate_runspec(spec);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

void add_physics_flags(CLI::App* cmd, goddard::RunOptions& opt) {
    cmd->add_option("--beta", opt.params.beta, "drag decay constant");
    cmd->add_option("--s-rho0", opt.params.s_rho0, "cross-section times surface air density");
    cmd->add_option("--cd", opt.params.c_d, "drag constant");
    cmd->add_option("--c", opt.params.c, "exhaust velocity");
    cmd->add_option("--u-min", opt.params.u_min, "control lower bound");
    cmd->add_option("--h0", opt.params.h0, "initial altitude");
    cmd->add_option("--ht", opt.params.hT, "terminal altitude");
    cmd->add_option("--m-payload", opt.params.m_payload, "payload mass floor");
    cmd->add_option("--v-eps", opt.v_eps, "lowest speed grid node");
    cmd->add_option("--v-max", opt.v_max, "highest speed grid node");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-horizon influence diagram solver for the bounded-thrust ascent problem"};
    app.require_subcommand(1);

    RunCli run_cli;
    goddard::RunOptions opt;
    CLI::App* run = app.add_subcommand("run", "solve a discretization and write profile CSVs");
    run->add_option("name", run_cli.name, "run name nv.nu.nm.{E|RK|G}.dh");
    run->add_option("--nv", run_cli.nv, "speed-state count");
    run->add_option("--nu", run_cli.nu, "control-state count");
    run->add_option("--nm", run_cli.nm, "mass-state count");
    run->add_option("--method", run_cli.method, "stepper key: E, RK, or G");
    run->add_option("--dh", run_cli.dh, "segment length");
    run->add_option("--reference", opt.reference_path, "reference trajectory CSV to compare against");
    run->add_option("--out", opt.out_dir, "output directory (default .)");
    add_physics_flags(run, opt);

    std::string parse_name;
    CLI::App* parse = app.add_subcommand("parse", "echo the fields of a run name");
    parse->add_option("name", parse_name, "run name nv.nu.nm.{E|RK|G}.dh")->required();

    std::string conv_method;
    CLI::App* conv = app.add_subcommand("convergence", "print the stepper order study");
    conv->add_option("--method", conv_method, "stepper key: E, RK, or G")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // CLI11's per-error exit codes collapse onto the documented contract:
        // 0 for --help, 1 for every usage problem.
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (run->parsed()) {
        goddard::RunSpec spec;
        if (int rc = resolve_spec(run_cli, spec, std::cerr)) return rc;
        return goddard::run_pipeline(spec, opt, std::cout, std::cerr);
    }

    if (parse->parsed()) {
        try {
            goddard::RunSpec spec = goddard::parse_runspec(parse_name);
            std::cout << "name: " << goddard::format_runspec(spec) << "\n"
                      << "nv: " << spec.nv << "\n"
                      << "nu: " << spec.nu << "\n"
                      << "nm: " << spec.nm << "\n"
                      << "method: " << goddard::method_key(spec.method) << "\n"
                      << "dh: " << goddard::detail::format_dh(spec.dh) << "\n";
        } catch (const std::invalid_argument& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
        return 0;
    }

    try {
        goddard::ConvergenceStudy study =
            goddard::convergence_study(goddard::parse_method(conv_method));
        std::cout << "method: " << goddard::method_key(study.method) << "\n"
                  << "n_steps,dh,err\n";
        for (const goddard::ConvergenceRow& r : study.rows)
            std::cout << r.n_steps << "," << goddard::detail::format_double_shortest(r.dh)
                      << "," << goddard::detail::format_double_shortest(r.err) << "\n";
        std::cout << "slope: " << goddard::detail::format_double_shortest(study.slope) << "\n";
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
