#include "doctest.h"

#include "weakkam/errors.hpp"
#include "weakkam/experiment.hpp"
#include "weakkam/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace weakkam;

TEST_CASE("grid CSV round trip") {
    auto u = GridFunction::sample(20, 2, [](const Vec& q) { return std::sin(7.1 * q[0]) + q[1] / 3.0; });
    u.meta.c = Vec::Constant(2, 0.25);
    u.meta.lambda = 0.1;
    u.meta.alpha = 1.0 / 3.0;
    std::stringstream ss;
    io::write_grid_csv(u, ss);
    auto v = io::read_grid_csv(ss);
    CHECK(v.n() == 20);
    CHECK(v.dim() == 2);
    CHECK(v.values() == u.values());
    CHECK(v.meta.alpha == u.meta.alpha);
    CHECK(v.meta.lambda == u.meta.lambda);
    CHECK(v.meta.c == u.meta.c);
}

TEST_CASE("grid binary round trip and files") {
    auto u = GridFunction::sample(33, 1, [](const Vec& q) { return std::exp(q[0]); });
    std::stringstream ss;
    io::write_grid_binary(u, ss);
    auto v = io::read_grid_binary(ss);
    CHECK(v.values() == u.values());

    auto dir = std::filesystem::temp_directory_path() / "weakkam_io_test";
    std::filesystem::create_directories(dir);
    io::save_grid(u, (dir / "u.bin").string());
    io::save_grid(u, (dir / "u.csv").string());
    CHECK(io::load_grid((dir / "u.bin").string()).values() == u.values());
    CHECK(io::load_grid((dir / "u.csv").string()).values() == u.values());
    std::filesystem::remove_all(dir);

    std::stringstream bad("not a grid");
    CHECK_THROWS_AS(io::read_grid_binary(bad), InputError);
}

TEST_CASE("cloud CSV round trip") {
    GraphCloud c;
    Vec a(1), b(1);
    a << 0.125;
    b << -0.7;
    c.add(a, b);
    c.add(b, a);
    c.source_tag = "test";
    std::stringstream ss;
    io::write_cloud_csv(c, ss);
    auto d = io::read_cloud_csv(ss);
    REQUIRE(d.size() == 2);
    CHECK(d.theta[0] == c.theta[0]);
    CHECK(d.p[1] == c.p[1]);
}

TEST_CASE("experiment specs") {
    for (const auto& name : experiment::preset_names()) {
        auto s = experiment::preset(name);
        CHECK_NOTHROW(s.validate());
        auto back = experiment::from_json(experiment::to_json(s));
        CHECK(experiment::to_json(back) == experiment::to_json(s));
    }
    CHECK_THROWS_AS(experiment::preset("nosuch"), ConfigError);
    try {
        experiment::from_json(R"({"name": "x", "bogus": 1})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "bogus");
    }
    auto s = experiment::from_json(R"({"preset": "lo-iteration", "n": 64})");
    CHECK(s.n == 64);
    CHECK(s.model == experiment::preset("lo-iteration").model);
    auto bad = experiment::preset("lo-iteration");
    bad.values = {1.0, 1.0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("experiment runs are deterministic") {
    auto s = experiment::preset("lo-iteration");
    s.values = {0.5, 1.0, 2.0};
    s.n = 64;
    auto a = experiment::run(s);
    auto b = experiment::run(s);
    CHECK(experiment::csv_text(s, a) == experiment::csv_text(s, b));
    CHECK(a.config_hash == b.config_hash);
    REQUIRE(a.rows.size() == 3);
    for (const auto& r : a.rows) CHECK(r.status == "ok");
    CHECK(a.rows[0].metrics[0] > a.rows[2].metrics[0]);

    auto w = s;
    w.workers = 2;
    auto c = experiment::run(w);
    CHECK(experiment::csv_text(s, a) == experiment::csv_text(w, c));

    auto dir = std::filesystem::temp_directory_path() / "weakkam_exp_test";
    s.output_dir = dir.string();
    auto path = experiment::write_outputs(s, a);
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();
    CHECK(text.str() == experiment::csv_text(s, a));
    CHECK(std::filesystem::exists(dir / (s.name + "_manifest.json")));
    CHECK(std::filesystem::exists(dir / (s.name + "_C0.dat")));
    std::filesystem::remove_all(dir);
}

TEST_CASE("hashing") {
    CHECK(experiment::fnv1a_hex("") == "cbf29ce484222325");
    CHECK(experiment::fnv1a_hex("a") == "af63dc4c8601ec8c");
}
