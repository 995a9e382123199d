#include "lasdi_app/config.hpp"

#include <functional>
#include <map>

namespace lasdi::app {

namespace {

ParameterSet grid2(Range a, Range b) { return ParameterSet{{a, b}, {}}; }
ParameterSet grid1(Range a) { return ParameterSet{{a}, {}}; }

RunConfig base(std::string name, ProblemKind kind) {
    RunConfig c;
    c.output = "runs/" + name;
    c.name = std::move(name);
    c.problem.kind = kind;
    return c;
}

void use_pod(RunConfig& c, std::size_t n_s) {
    c.compressor.type = CompressorConfig::Type::pod;
    c.compressor.latent_dim = n_s;
    c.library.latent_dim = n_s;
}

// Shallow masked autoencoder sized for a single-core budget: narrow dense
// encoder, strided training columns, small minibatches.
void use_autoencoder(RunConfig& c, std::size_t n_s, std::size_t hidden_width) {
    c.compressor.type = CompressorConfig::Type::autoencoder;
    c.compressor.latent_dim = n_s;
    auto& a = c.compressor.autoencoder;
    a.latent_dim = n_s;
    a.hidden_width = hidden_width;
    a.encoder_width = 100;
    a.activation = Activation::sigmoid;
    a.epochs = 1000;
    a.learning_rate = 1e-3;
    a.batch_size = 32;
    a.train_stride = 10;
    a.seed = 0;
    c.library.latent_dim = n_s;
}

RunConfig burgers1d(const std::string& name, double step, bool nm) {
    RunConfig c = base(name, ProblemKind::burgers1d);
    c.train = grid2({0.7, 0.9, step}, {0.9, 1.1, step});
    c.test = grid2({0.7, 0.9, 0.01}, {0.9, 1.1, 0.01});
    if (nm) {
        use_autoencoder(c, 4, 3 * 1001);
    } else {
        use_pod(c, 5);
    }
    c.showcase = ParameterPoint{{0.8, 1.01}};
    return c;
}

RunConfig burgers2d(const std::string& name, bool nm) {
    RunConfig c = base(name, ProblemKind::burgers2d);
    c.train = grid2({0.7, 0.9, 0.05}, {0.9, 1.1, 0.05});
    c.test = grid2({0.7, 0.9, 0.02}, {0.9, 1.1, 0.02});
    if (nm) {
        // Three latent coordinates with a cubic library including cross terms.
        use_autoencoder(c, 3, 61 * 61);
        c.library.poly_degree = 3;
    } else {
        use_pod(c, 5);
    }
    c.showcase = ParameterPoint{{0.8, 1.01}};
    return c;
}

RunConfig heat(const std::string& name, bool nm) {
    RunConfig c = base(name, ProblemKind::heat2d);
    c.train = grid2({0.2, 5.0, 0.8}, {1.8, 2.2, 0.2});
    c.test = grid2({0.2, 5.0, 0.04}, {1.8, 2.2, 0.01});
    if (nm) {
        use_autoencoder(c, 3, 65 * 65);
        c.library.poly_degree = 0;
    } else {
        use_pod(c, 5);
    }
    c.showcase = ParameterPoint{{1.0, 2.0}};
    return c;
}

RunConfig advect(const std::string& name, double hi, double step, bool nm) {
    RunConfig c = base(name, ProblemKind::advect2d);
    c.train = grid1({0.6, hi, step});
    c.test = grid1({0.6, hi, 0.01});
    if (nm) {
        use_autoencoder(c, 4, 64 * 64);
    } else {
        use_pod(c, 5);
    }
    // The small parameter space with the finer training set uses a quadratic
    // system without cross terms; the others are linear.
    if (hi == 1.0 && step == 0.05) {
        c.library.poly_degree = 2;
        c.library.cross_terms = false;
    }
    c.showcase = ParameterPoint{{0.85}};
    return c;
}

const std::map<std::string, std::function<RunConfig()>>& registry() {
    static const std::map<std::string, std::function<RunConfig()>> r = {
        {"burgers1d-4pt", [] { return burgers1d("burgers1d-4pt", 0.2, false); }},
        {"burgers1d-9pt", [] { return burgers1d("burgers1d-9pt", 0.1, false); }},
        {"burgers1d-25pt", [] { return burgers1d("burgers1d-25pt", 0.05, false); }},
        {"burgers1d-4pt-nm", [] { return burgers1d("burgers1d-4pt-nm", 0.2, true); }},
        {"burgers1d-9pt-nm", [] { return burgers1d("burgers1d-9pt-nm", 0.1, true); }},
        {"burgers1d-25pt-nm", [] { return burgers1d("burgers1d-25pt-nm", 0.05, true); }},
        {"burgers2d-25pt", [] { return burgers2d("burgers2d-25pt", true); }},
        {"burgers2d-25pt-ls", [] { return burgers2d("burgers2d-25pt-ls", false); }},
        {"heat-21pt", [] { return heat("heat-21pt", false); }},
        {"heat-21pt-nm", [] { return heat("heat-21pt-nm", true); }},
        {"advect-small-coarse", [] { return advect("advect-small-coarse", 1.0, 0.1, false); }},
        {"advect-small-fine", [] { return advect("advect-small-fine", 1.0, 0.05, false); }},
        {"advect-large-coarse", [] { return advect("advect-large-coarse", 1.4, 0.1, false); }},
        {"advect-large-fine", [] { return advect("advect-large-fine", 1.4, 0.05, false); }},
        {"advect-small-coarse-nm", [] { return advect("advect-small-coarse-nm", 1.0, 0.1, true); }},
        {"advect-small-fine-nm", [] { return advect("advect-small-fine-nm", 1.0, 0.05, true); }},
        {"advect-large-coarse-nm", [] { return advect("advect-large-coarse-nm", 1.4, 0.1, true); }},
        {"advect-large-fine-nm", [] { return advect("advect-large-fine-nm", 1.4, 0.05, true); }},
    };
    return r;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [name, make] : registry()) out.push_back(name);
    return out;
}

RunConfig preset(std::string_view name) {
    const auto& r = registry();
    const auto it = r.find(std::string(name));
    if (it == r.end()) {
        std::string known;
        for (const auto& [n, make] : r) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
    }
    return it->second();
}

}  // namespace lasdi::app
