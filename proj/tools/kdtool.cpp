#include "kd/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace kd::cli;
    CLI::App app{"Exact Koszul-duality engine on truncated trigraded models"};
    app.set_help_flag("-h,--help", "Show help");

    JobSpec job;
    std::string window, format = "text";
    int n = 0, m = 0, shift = 0, relative = 0;
    bool spencer = false, koszul = false, de_rham = false;

    std::string command;
    app.add_option("command", command, "One of: cohomology, dualize, shear, gr, un, verify-acyclicity, verify-table, "
                                       "verify-roundtrip, mf-extract, catalogue-list, run (command from the [job] section)")
        ->required();
    app.add_option("input", job.input, "Catalogue entry name or input file");
    auto* wopt = app.add_option("--window", window, "Window, e.g. d=-8..8,w=-6..6,a=8");
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "machine"}));
    app.add_option("--jobs", job.jobs, "Worker threads (output does not depend on it)")->check(CLI::PositiveNumber);
    app.add_option("--fixtures", job.fixtures, "Oracle fixture directory (overrides KD_FIXTURES)");
    auto* nopt = app.add_option("--n", n, "Dimension or block index");
    auto* mopt = app.add_option("--m", m, "Neighbourhood order");
    auto* sopt = app.add_option("--shift", shift, "Shear amount for the shear command");
    auto* ropt = app.add_option("--relative", relative, "verify-acyclicity: relative Spencer sequence onto A^m");
    app.add_flag("--spencer", spencer, "verify-acyclicity: Spencer augmentation cone");
    app.add_flag("--koszul", koszul, "verify-acyclicity: deformed Koszul augmentation cone");
    app.add_flag("--de-rham", de_rham, "verify-acyclicity: deformed de Rham cone");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : input_invalid;
    }

    job.command = command == "run" ? "" : command;
    job.format = format == "machine" ? Format::machine : Format::text;
    if (*nopt) job.n = n;
    if (*mopt) job.m = m;
    if (*sopt) job.shift = shift;
    if (*ropt) job.relative = relative;
    if (spencer) job.lemmas.push_back("spencer");
    if (koszul) job.lemmas.push_back("koszul");
    if (de_rham) job.lemmas.push_back("de-rham");
    if (*wopt) {
        try {
            job.window = kd::parse_window(window);
        } catch (const std::exception& e) {
            std::cerr << "invalid input: " << e.what() << "\n";
            return input_invalid;
        }
    }

    RunResult r = run(job);
    std::cout << r.out;
    if (!r.err.empty()) std::cerr << r.err << "\n";
    return r.exit_code;
}
