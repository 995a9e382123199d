#include "lasdi_app/config.hpp"

#include "tempdir.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

using namespace lasdi;
using namespace lasdi::app;

namespace {

constexpr const char* kMinimal = R"({
  "name": "mini",
  "problem": {"kind": "burgers1d", "nodes": [101], "dt": 0.01, "n_steps": 50},
  "train": {"grid": [{"start": 0.7, "stop": 0.9, "step": 0.2}, {"start": 0.9, "stop": 1.1, "step": 0.2}]},
  "test": {"points": [[0.8, 1.0]]},
  "compressor": {"type": "pod", "latent_dim": 3}
})";

}  // namespace

TEST(Range, Burgers1dTestGridHas21Values) {
    const auto v = Range{0.7, 0.9, 0.01}.expand();
    ASSERT_EQ(v.size(), 21u);
    EXPECT_EQ(v.front(), 0.7);
    EXPECT_EQ(v[1], 0.71);
    EXPECT_EQ(v[13], 0.83);
    EXPECT_EQ(v.back(), 0.9);
}

TEST(Range, TableCardinalities) {
    EXPECT_EQ((Range{0.7, 0.9, 0.2}.expand().size()), 2u);
    EXPECT_EQ((Range{0.7, 0.9, 0.1}.expand().size()), 3u);
    EXPECT_EQ((Range{0.7, 0.9, 0.05}.expand().size()), 5u);
    EXPECT_EQ((Range{0.2, 5.0, 0.8}.expand().size()), 7u);
    EXPECT_EQ((Range{1.8, 2.2, 0.2}.expand().size()), 3u);
    EXPECT_EQ((Range{0.2, 5.0, 0.04}.expand().size()), 121u);
    EXPECT_EQ((Range{1.8, 2.2, 0.01}.expand().size()), 41u);
    EXPECT_EQ((Range{0.6, 1.4, 0.01}.expand().size()), 81u);
}

TEST(Range, StopIsNeverExceeded) {
    const auto v = Range{0.0, 1.0, 0.3}.expand();
    EXPECT_EQ(v, (std::vector<double>{0.0, 0.3, 0.6, 0.9}));
    EXPECT_EQ((Range{0.5, 0.5, 0.1}.expand()), std::vector<double>{0.5});
}

TEST(Range, InvalidRanges) {
    EXPECT_THROW((Range{0.9, 0.7, 0.01}.expand()), ConfigError);
    EXPECT_THROW((Range{0.7, 0.9, 0.0}.expand()), ConfigError);
    EXPECT_THROW((Range{0.7, 0.9, -0.1}.expand()), ConfigError);
}

TEST(ParameterSet, GridIsFirstAxisOutermost) {
    ParameterSet s;
    s.grid = {Range{0.7, 0.9, 0.2}, Range{0.9, 1.1, 0.2}};
    const auto pts = s.expand();
    const std::vector<ParameterPoint> expected{{{0.7, 0.9}}, {{0.7, 1.1}}, {{0.9, 0.9}}, {{0.9, 1.1}}};
    EXPECT_EQ(pts, expected);
}

TEST(Config, ParseMinimal) {
    const auto c = parse_config(kMinimal);
    EXPECT_EQ(c.name, "mini");
    EXPECT_EQ(c.problem.kind, ProblemKind::burgers1d);
    EXPECT_EQ(c.train.expand().size(), 4u);
    EXPECT_EQ(c.test.expand().size(), 1u);
    EXPECT_EQ(c.compressor.latent_dim, 3u);
    EXPECT_EQ(c.library.latent_dim, 3u);
    EXPECT_EQ(c.strategy.kind, DiKind::global);
    const auto p = c.problem.build();
    EXPECT_EQ(p.grid.axes[0].nodes, 101u);
    EXPECT_EQ(p.time.n_steps, 50u);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, RoundTripIsIdentity) {
    const auto c = parse_config(kMinimal);
    EXPECT_TRUE(parse_config(to_json(c)) == c);
}

TEST(Config, EveryPresetRoundTripsAndValidates) {
    const auto names = preset_names();
    for (const char* required : {"burgers1d-4pt", "burgers1d-9pt", "burgers1d-25pt", "burgers2d-25pt", "heat-21pt",
                                 "advect-small-coarse", "advect-small-fine", "advect-large-coarse",
                                 "advect-large-fine"}) {
        EXPECT_NE(std::find(names.begin(), names.end(), required), names.end()) << required;
    }
    for (const auto& n : names) {
        const auto c = preset(n);
        EXPECT_NO_THROW(c.validate()) << n;
        const std::string text = to_json(c);
        const auto back = parse_config(text);
        EXPECT_TRUE(back == c) << n;
        EXPECT_EQ(to_json(back), text) << n;
    }
    EXPECT_THROW(preset("nope"), ConfigError);
}

TEST(Config, PresetTrainingSets) {
    EXPECT_EQ(preset("burgers1d-4pt").train.expand().size(), 4u);
    EXPECT_EQ(preset("burgers1d-9pt").train.expand().size(), 9u);
    EXPECT_EQ(preset("burgers1d-25pt").train.expand().size(), 25u);
    EXPECT_EQ(preset("burgers1d-4pt").test.expand().size(), 441u);
    EXPECT_EQ(preset("heat-21pt").train.expand().size(), 21u);
    EXPECT_EQ(preset("burgers2d-25pt").train.expand().size(), 25u);
    const auto showcase = preset("burgers1d-4pt").showcase;
    ASSERT_TRUE(showcase.has_value());
    EXPECT_EQ(*showcase, (ParameterPoint{{0.8, 1.01}}));
}

TEST(Config, UnknownKeysAreRejected) {
    EXPECT_THROW(parse_config(R"({"problem": {"kind": "burgers1d"}, "trian": {}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"problem": {"kind": "burgers1d", "nodez": [3]}})"), ConfigError);
}

TEST(Config, MalformedInput) {
    EXPECT_THROW(parse_config("{"), ConfigError);
    EXPECT_THROW(parse_config(R"({"name": "x"})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"problem": {"kind": "wave"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"problem": {"kind": "burgers1d", "dt": "fast"}})"), ConfigError);
}

TEST(Config, ValidationCatchesInconsistencies) {
    auto c = parse_config(kMinimal);
    c.train.grid[0] = Range{0.9, 0.7, 0.1};
    EXPECT_THROW(c.validate(), ConfigError);

    c = parse_config(kMinimal);
    c.train.grid.pop_back();
    EXPECT_THROW(c.validate(), ConfigError);

    c = parse_config(kMinimal);
    c.strategy = DiStrategy{DiKind::local, 5};
    EXPECT_THROW(c.validate(), ConfigError);

    c = parse_config(kMinimal);
    c.library.poly_degree = 6;
    EXPECT_THROW(c.validate(), ConfigError);

    c = parse_config(kMinimal);
    c.train.grid.clear();
    c.train.points = {ParameterPoint{{0.7, 0.9}}, ParameterPoint{{0.8, 0.95}}, ParameterPoint{{0.9, 1.1}},
                      ParameterPoint{{0.7, 1.1}}};
    c.strategy = DiStrategy{DiKind::interpolated, 0, InterpMethod::bilinear};
    try {
        c.validate();
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("grid"), std::string::npos);
    }

    c = parse_config(kMinimal);
    c.train.grid.clear();
    c.train.points = {ParameterPoint{{0.7, 0.9}}, ParameterPoint{{0.7, 0.9}}};
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, EmptyTestSetIsAllowed) {
    auto c = parse_config(kMinimal);
    c.test = {};
    EXPECT_NO_THROW(c.validate());
    EXPECT_TRUE(parse_config(to_json(c)) == c);
}

TEST(Config, ProblemOverridesAreChecked) {
    ProblemConfig p;
    p.kind = ProblemKind::heat2d;
    p.nodes = {17};
    EXPECT_THROW(p.build(), ConfigError);
    p.nodes = {17, 9};
    EXPECT_EQ(p.build().grid.node_count(), 17u * 9u);
    p.dt = -1.0;
    EXPECT_THROW(p.build(), ConfigError);
}

TEST(Config, AutoencoderFieldsOnlyForAutoencoders) {
    EXPECT_THROW(parse_config(R"({"problem": {"kind": "burgers1d"}, "compressor": {"type": "pod", "epochs": 10}})"),
                 ConfigError);
    const auto c = parse_config(
        R"({"problem": {"kind": "burgers1d"}, "compressor": {"type": "autoencoder", "latent_dim": 4, "epochs": 10, "activation": "swish"}})");
    EXPECT_EQ(c.compressor.type, CompressorConfig::Type::autoencoder);
    EXPECT_EQ(c.compressor.autoencoder.latent_dim, 4u);
    EXPECT_EQ(c.compressor.autoencoder.epochs, 10u);
    EXPECT_EQ(c.compressor.autoencoder.activation, Activation::swish);
}

TEST(Config, SectionJsonIsCanonical) {
    auto a = parse_config(kMinimal);
    auto b = parse_config(kMinimal);
    b.name = "other";
    EXPECT_EQ(section_json(a, "problem"), section_json(b, "problem"));
    b.problem.dt = 0.02;
    EXPECT_NE(section_json(a, "problem"), section_json(b, "problem"));
}

TEST(Config, LoadFromFile) {
    test::TempDir dir;
    {
        std::ofstream out(dir / "c.json");
        out << kMinimal;
    }
    EXPECT_TRUE(load_config(dir / "c.json") == parse_config(kMinimal));
    EXPECT_THROW(load_config(dir / "missing.json"), IoError);
}
