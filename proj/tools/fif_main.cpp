#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "fif/commands.hpp"

namespace {

struct Overrides {
    double tol = -1.0;
    int max_iter = -1;
    int refinement = -1;
};

void apply(fif::RunConfig& cfg, const Overrides& o) {
    if (o.tol > 0.0) cfg.solver.tol = o.tol;
    if (o.max_iter > 0) cfg.solver.max_iter = o.max_iter;
    if (o.refinement > 0) cfg.solver.refinement = o.refinement;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractal interpolation toolkit: constructs self-referential perturbations of "
                 "continuous functions on hyperrectangular grids and verifies their bounds"};
    app.require_subcommand(1);

    Overrides overrides;
    app.add_option("--tol", overrides.tol, "override solver tolerance");
    app.add_option("--max-iter", overrides.max_iter, "override solver iteration cap");
    app.add_option("--refine", overrides.refinement, "override lattice refinement per cell");

    struct Sub {
        fif::Command cmd;
        std::string config;
        std::string out_dir;
    };
    std::vector<std::shared_ptr<Sub>> subs;
    auto add = [&](fif::Command cmd, const char* help, bool needs_out) {
        auto state = std::make_shared<Sub>();
        state->cmd = cmd;
        CLI::App* sub = app.add_subcommand(fif::command_name(cmd), help);
        sub->fallthrough();  // global overrides may follow the subcommand
        sub->add_option("config", state->config, "JSON run configuration")->required();
        auto* out = sub->add_option("-o,--out", state->out_dir, "output directory for artifacts");
        if (needs_out) out->required();
        subs.push_back(state);
        return sub;
    };

    add(fif::Command::Construct, "solve the fractal perturbation and export lattice samples", true);
    add(fif::Command::Verify, "run the verification suite against the configured system", false);
    add(fif::Command::Study, "error table for a scaling or base sequence", true);
    add(fif::Command::OperatorBounds, "relative boundedness / Lipschitz report for an operator",
        true);
    add(fif::Command::Invert, "recover the seed whose fractal image matches a target", true);
    add(fif::Command::Attractor, "deterministic IFS point cloud and consistency report", true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);  // prints the message or requested help
        return rc == 0 ? 0 : 1;     // usage errors map to exit 1
    }

    for (const auto& state : subs) {
        if (!app.get_subcommand(fif::command_name(state->cmd))->parsed()) continue;
        try {
            fif::RunConfig cfg = fif::load_config(state->config);
            apply(cfg, overrides);
            return fif::run_command(state->cmd, cfg, state->out_dir, std::cout);
        } catch (const fif::FifError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return fif::exit_code_for(e.code());
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    return 1;
}
