#include <doctest.h>

#include <filesystem>

#include "rdv/config.hpp"
#include "rdv/csv.hpp"
#include "rdv/sweep.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = fs::path(RDV_SOURCE_DIR) / "scenarios";

nlohmann::json minimal() {
    return {{"map",
             {{"landing_site", {0, 0}},
              {"paths", {{{"id", 1}, {"vertices", {{-100, 200}, {400, 200}}}}}}}}};
}

}  // namespace

TEST_CASE("bundled scenarios parse") {
    for (const char* f : {"scenario_fig7.json", "scenario_single.json", "scenario_three.json"}) {
        const auto cfg = rdv::load_config(kScenarios / f);
        CHECK(cfg.map.has_value());
        CHECK(cfg.path_weights().size() == cfg.paths().size());
    }
    const auto fig7 = rdv::load_config(kScenarios / "scenario_fig7.json");
    CHECK(fig7.planner.params.mass_loaded == 3.0);
    CHECK(fig7.planner.params.mass_empty == 1.0);
    CHECK(fig7.planner.params.alpha == 20.0);
    CHECK(fig7.planner.energy == 16000.0);
    CHECK(fig7.sampler.n_s == 5);
    CHECK(fig7.run.seed == 42);
}

TEST_CASE("defaults are materialized") {
    const auto cfg = rdv::parse_config(minimal());
    CHECK(cfg.sampler.n_e == 2);
    CHECK(cfg.sampler.lambda == 0.5);
    CHECK(cfg.gp.n_inducing == 30);
    CHECK(cfg.risk.gamma == 0.05);
    CHECK(cfg.risk.kappa == 0.0);
    CHECK(cfg.run.control_period == 1.0);
    CHECK(cfg.run.epsilon == 1.0);
    CHECK(cfg.uas_start() == cfg.paths().landing_site());
    const auto j = rdv::to_json(cfg);
    CHECK(j["sampler"]["strategy"] == "worst_first");
    CHECK(j["map"].is_object());
}

TEST_CASE("unknown and invalid keys are named") {
    auto doc = minimal();
    doc["risk"] = {{"kapa", 0}};
    CHECK_THROWS_WITH_AS(rdv::parse_config(doc), doctest::Contains("risk.kapa"), rdv::ValidationError);

    doc = minimal();
    doc["planner"] = {{"v_max", -1}};
    CHECK_THROWS_WITH_AS(rdv::parse_config(doc), doctest::Contains("v_max"), rdv::ValidationError);

    doc = minimal();
    doc["sampler"] = {{"weights", {1, 2}}};
    CHECK_THROWS_WITH_AS(rdv::parse_config(doc), doctest::Contains("weights"), rdv::ValidationError);

    doc = minimal();
    doc["sampler"] = {{"n_s", 2}, {"n_e", 2}};
    CHECK_THROWS_AS(rdv::parse_config(doc), rdv::ValidationError);

    doc = minimal();
    doc["run"] = {{"control_period", 1.0}, {"epsilon", 0.5}};
    CHECK_THROWS_WITH_AS(rdv::parse_config(doc), doctest::Contains("epsilon"), rdv::ValidationError);

    doc = minimal();
    doc["bogus"] = 1;
    CHECK_THROWS_WITH_AS(rdv::parse_config(doc), doctest::Contains("bogus"), rdv::ValidationError);
}

TEST_CASE("resolved config round trips and hashes stably") {
    const auto cfg = rdv::load_config(kScenarios / "scenario_fig7.json");
    const auto again = rdv::parse_config(rdv::to_json(cfg));
    CHECK(rdv::to_json(again) == rdv::to_json(cfg));
    CHECK(rdv::config_hash(again) == rdv::config_hash(cfg));
    CHECK(rdv::config_hash(cfg).size() == 16);

    auto doc = rdv::to_json(cfg);
    rdv::set_config_value(doc, "risk.kappa", "-inf");
    const auto changed = rdv::parse_config(doc);
    CHECK(std::isinf(changed.risk.kappa));
    CHECK(changed.risk.kappa < 0);
    CHECK(rdv::config_hash(changed) != rdv::config_hash(cfg));
    CHECK_THROWS_AS(rdv::set_config_value(doc, "risk.kapa", 1), rdv::ValidationError);
}

TEST_CASE("parse_real accepts infinities") {
    CHECK(rdv::parse_real(2.5, "k") == 2.5);
    CHECK(std::isinf(rdv::parse_real("inf", "k")));
    CHECK(rdv::parse_real("-inf", "k") < 0);
    CHECK_THROWS_AS(rdv::parse_real("abc", "k"), rdv::ValidationError);
}

TEST_CASE("variations") {
    const auto v = rdv::parse_variation("risk.kappa=-inf,0");
    CHECK(v.key == "risk.kappa");
    REQUIRE(v.values.size() == 2);
    const auto r = rdv::parse_variation("planner.energy=10000:16000:4");
    REQUIRE(r.values.size() == 4);
    CHECK(r.values[1].get<double>() == doctest::Approx(12000.0));
    CHECK_THROWS_AS(rdv::parse_variation("nothing"), rdv::ValidationError);
}

TEST_CASE("csv formatting") {
    rdv::CsvTable t({"a", "b", "c"});
    t.row() << 1 << 0.1 << std::string("x");
    t.row() << -std::numeric_limits<double>::infinity() << 1e-300 << "y";
    const std::string s = t.str();
    CHECK(s.rfind("a,b,c\n", 0) == 0);
    CHECK(s.find("1,0.1,x") != std::string::npos);
    CHECK(s.find("-inf") != std::string::npos);
    CHECK(rdv::format_real(0.1) == "0.1");
}
