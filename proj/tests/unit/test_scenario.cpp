#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "pvobs/scenario.hpp"

namespace pvobs {
namespace {

using nlohmann::json;

json minimal() {
  return json::parse(R"({
    "model": {"free_flow_speed": 70, "viscosity": 0},
    "initial_condition": [{"constant": 0.5}],
    "probes": {"positions": [0.1, 0.6]},
    "horizon": 0.1
  })");
}

std::string error_of(const json& doc) {
  try {
    (void)scenario_from_json(doc);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return "";
}

TEST(Scenario, PaperExampleFile) {
  const auto sc = parse_scenario(std::string(PVOBS_SCENARIO_DIR) + "/paper_example.json");
  EXPECT_EQ(sc.name, "paper_example");
  EXPECT_DOUBLE_EQ(sc.params.free_flow_speed(), 70.0);
  EXPECT_TRUE(sc.params.inviscid());
  EXPECT_EQ(sc.probe_positions, (std::vector<double>{0.1, 0.6, 0.8, 1.1}));
  EXPECT_EQ(sc.grid.size(), 300u);
  EXPECT_DOUBLE_EQ(sc.grid.x_min(), -2.0);
  EXPECT_DOUBLE_EQ(sc.grid.x_max(), 30.0);
  EXPECT_DOUBLE_EQ(sc.horizon, 0.25);
  EXPECT_EQ(sc.save_every, 20u);
  EXPECT_EQ(sc.mode, ObserverMode::inviscid);
  EXPECT_DOUBLE_EQ(sc.ic(0.1), 0.5 + 0.1 * std::sin(0.5));
  EXPECT_DOUBLE_EQ(sc.ic(3.3), 0.4);
  EXPECT_DOUBLE_EQ(sc.ic(3.65), 0.5);
  EXPECT_DOUBLE_EQ(sc.ic(10.0), 0.65);
}

TEST(Scenario, ShippedFilesParse) {
  for (const char* name : {"constant.json", "viscous_certified.json"}) {
    EXPECT_NO_THROW((void)parse_scenario(std::string(PVOBS_SCENARIO_DIR) + "/" + name)) << name;
  }
}

TEST(Scenario, DefaultsAreFilled) {
  const auto sc = scenario_from_json(minimal());
  EXPECT_EQ(sc.grid.size(), 300u);
  EXPECT_DOUBLE_EQ(sc.cfl_safety, 0.9);
  EXPECT_DOUBLE_EQ(sc.measurement_noise, 0.0);
  EXPECT_EQ(sc.mode, ObserverMode::inviscid);
  EXPECT_TRUE(sc.grid.contains(0.1));
  EXPECT_TRUE(sc.grid.contains(0.6 + 70.0 * 0.1));
}

TEST(Scenario, ViscousModelDefaultsToViscousObserver) {
  auto doc = minimal();
  doc["model"]["viscosity"] = 3.0;
  EXPECT_EQ(scenario_from_json(doc).mode, ObserverMode::viscous);
}

TEST(Scenario, OrderingViolationNamesTheInvariant) {
  auto doc = minimal();
  doc["probes"]["positions"] = {0.6, 0.1};
  const auto msg = error_of(doc);
  EXPECT_NE(msg.find("ordering invariant"), std::string::npos) << msg;
  EXPECT_NE(msg.find("strictly increasing"), std::string::npos) << msg;
}

TEST(Scenario, FieldLevelMessages) {
  auto doc = minimal();
  doc["model"].erase("free_flow_speed");
  EXPECT_NE(error_of(doc).find("model.free_flow_speed"), std::string::npos);

  doc = minimal();
  doc["horizon"] = "long";
  EXPECT_NE(error_of(doc).find("horizon"), std::string::npos);

  doc = minimal();
  doc["initial_condition"] = json::array({json{{"constant", 1.4}}});
  EXPECT_NE(error_of(doc).find("initial_condition"), std::string::npos);

  doc = minimal();
  doc["initial_condition"] = json::array({json{{"to", 1.0}, {"constant", 0.4}}});
  EXPECT_NE(error_of(doc).find("initial_condition"), std::string::npos);

  doc = minimal();
  doc["initial_condition"][0]["sinusoid"] = {{"offset", 0.5}, {"amplitude", 0.1}, {"frequency", 1.0}};
  EXPECT_NE(error_of(doc).find("exactly one"), std::string::npos);

  doc = minimal();
  doc["observer"] = {{"mode", "viscous"}};
  EXPECT_NE(error_of(doc).find("observer.mode"), std::string::npos);

  doc = minimal();
  doc["probes"]["positions"] = {0.1, 50.0};
  doc["grid"] = {{"x_min", -1.0}, {"x_max", 5.0}};
  EXPECT_NE(error_of(doc).find("inside the grid"), std::string::npos);

  doc = minimal();
  doc["grid"] = {{"cells", -3}};
  EXPECT_NE(error_of(doc).find("grid.cells"), std::string::npos);

  doc = minimal();
  doc["horizon"] = -1.0;
  EXPECT_NE(error_of(doc).find("horizon"), std::string::npos);
}

TEST(Scenario, FileErrors) {
  EXPECT_THROW((void)parse_scenario("/nonexistent/scenario.json"), ScenarioError);
  const auto bad = std::filesystem::temp_directory_path() / "pvobs_bad_scenario.json";
  std::ofstream(bad) << "{ not json";
  EXPECT_THROW((void)parse_scenario(bad), ScenarioError);
  std::filesystem::remove(bad);
}

}  // namespace
}  // namespace pvobs
