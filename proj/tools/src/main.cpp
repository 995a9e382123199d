// lasdi: command line driver for the reduced-order-modeling pipeline.

#include "lasdi_app/commands.hpp"

#include "lasdi/text.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>

namespace {

using namespace lasdi;
using namespace lasdi::app;

struct Common {
    std::string config_path;
    std::string preset_name;
    std::string out;
    std::size_t jobs = 1;
    bool deterministic = false;
    bool dry_run = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "JSON run configuration");
    cmd->add_option("--preset", c.preset_name, "named preset (see `lasdi dump --presets`)");
    cmd->add_option("--out", c.out, "output directory (default: $LASDI_OUT, then the config's output)");
    cmd->add_option("--jobs", c.jobs, "parallel parameter sweeps")->check(CLI::PositiveNumber);
    cmd->add_flag("--deterministic", c.deterministic, "force single-threaded execution");
    cmd->add_flag("--dry-run", c.dry_run, "print the stage plan without touching files");
}

RunConfig load(const Common& c) {
    if (c.config_path.empty() == c.preset_name.empty()) {
        throw ConfigError("give exactly one of --config or --preset");
    }
    return c.config_path.empty() ? preset(c.preset_name) : load_config(c.config_path);
}

CommandOptions options_of(const Common& c) {
    CommandOptions o;
    o.out = c.out;
    o.jobs = c.jobs;
    o.deterministic = c.deterministic;
    o.dry_run = c.dry_run;
    return o;
}

ParameterPoint parse_point(const std::string& s) {
    ParameterPoint p;
    for (const auto& field : text::split(s, ',')) {
        const auto v = text::parse_double(text::trim(field));
        if (!v || !std::isfinite(*v)) {
            throw ConfigError("--param: cannot parse '" + std::string(field) + "' as a finite number");
        }
        p.values.push_back(*v);
    }
    if (p.values.empty()) throw ConfigError("--param is empty");
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LaSDI reduced-order modeling: generate, compress, fit, predict, evaluate"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version()));

    Common common;
    auto* gen = app.add_subcommand("gen-fom", "solve the training set and store the snapshot matrix");
    auto* compress = app.add_subcommand("compress", "build the POD basis or train the autoencoder");
    auto* fit = app.add_subcommand("fit", "identify latent dynamics");
    auto* predict = app.add_subcommand("predict", "predict the full state at one parameter point");
    auto* evaluate = app.add_subcommand("evaluate", "sweep the test set and write error CSVs");
    auto* pipeline = app.add_subcommand("pipeline", "gen-fom, compress, fit and evaluate in order");
    auto* dump = app.add_subcommand("dump", "describe an artifact, print a preset, or list presets");
    for (auto* cmd : {gen, compress, fit, predict, evaluate, pipeline}) add_common(cmd, common);

    std::string param_text;
    bool reference = false;
    predict->add_option("--param", param_text, "comma-separated parameter values (default: the showcase point)");
    predict->add_flag("--reference", reference, "also solve the full model and report the error");

    std::string dump_path;
    bool list_presets = false;
    dump->add_option("file", dump_path, "artifact or JSON file");
    dump->add_option("--preset", common.preset_name, "print a preset as JSON");
    dump->add_flag("--presets", list_presets, "list preset names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (dump->parsed()) {
            if (list_presets) {
                for (const auto& n : preset_names()) std::cout << n << '\n';
            } else if (!common.preset_name.empty()) {
                std::cout << to_json(preset(common.preset_name)) << '\n';
            } else if (!dump_path.empty()) {
                std::cout << describe_artifact(dump_path);
            } else {
                throw ConfigError("dump needs a file, --preset NAME or --presets");
            }
            return 0;
        }

        const RunConfig config = load(common);
        const CommandOptions options = options_of(common);
        if (gen->parsed()) cmd_gen_fom(config, options);
        if (compress->parsed()) cmd_compress(config, options);
        if (fit->parsed()) cmd_fit(config, options);
        if (evaluate->parsed()) cmd_evaluate(config, options);
        if (pipeline->parsed()) cmd_pipeline(config, options);
        if (predict->parsed()) {
            ParameterPoint point;
            if (!param_text.empty()) {
                point = parse_point(param_text);
            } else if (config.showcase) {
                point = *config.showcase;
            } else {
                throw ConfigError("predict needs --param or a showcase point in the config");
            }
            cmd_predict(config, options, point, reference);
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "lasdi: error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}
