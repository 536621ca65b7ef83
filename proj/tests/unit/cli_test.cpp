#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <future>
#include <sstream>

#include "arthur/bus/mqtt.hpp"
#include "arthur/bus/topic.hpp"
#include "arthur/core/serialize.hpp"
#include "cli.hpp"

using namespace arthur;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result arthur_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("arthur-cli-" + std::to_string(::getpid()) + "-" +
                                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
    ::unsetenv("ARTHUR_BROKER");
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path dir;
  const fs::path data = ARTHUR_DATA_DIR;
};

TEST_F(CliTest, IngestExitCodes) {
  const auto out = (dir / "mold.json").string();
  auto r = arthur_cli({"ingest", (data / "corpus/valid/mold-assembly.xml").string(), "-o", out});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(read_file(out)).at("tasks").size(), 5u);
  r = arthur_cli({"ingest", (data / "corpus/malformed/unknown-part.xml").string(), "-o", out});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("unknown part 'p9'"), std::string::npos) << r.err;
  r = arthur_cli({"ingest", (data / "corpus/malformed/unclosed.xml").string(), "-o", out});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 5, column"), std::string::npos) << r.err;
}

TEST_F(CliTest, ScenarioPassFailAndStartup) {
  const auto report = (dir / "report.json").string();
  auto r = arthur_cli({"--report", report, "scenario", "1"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("scenario scenario1: PASS"), std::string::npos);
  EXPECT_TRUE(json::parse(read_file(report)).at("ok").get<bool>());

  fs::copy_file(data / "scenarios/scenario3.json", dir / "s3.json");
  auto golden = read_file(data / "scenarios/scenario3.trace");
  golden.replace(golden.find("12.0"), 4, "12.5");
  write_file_atomic(dir / "s3.trace", golden);
  r = arthur_cli({"scenario", (dir / "s3.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("trace diverges at line"), std::string::npos) << r.err;

  r = arthur_cli({"scenario", (dir / "missing.json").string()});
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, PhaseInProcessPersistsToStore) {
  const auto cfg = dir / "cfg.json";
  write_file_atomic(cfg, json{{"workstation", (data / "workstations/assembly-cell.json").string()},
                              {"store", "store.json"}}.dump());
  auto r = arthur_cli({"--config", cfg.string(), "--in-process", "phase", "refinement"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_workstation(dir / "store.json").phase, Phase::refinement);
  r = arthur_cli({"--config", cfg.string(), "--in-process", "phase", "operation"});
  EXPECT_EQ(load_workstation(dir / "store.json").phase, Phase::operation);
  r = arthur_cli({"--config", cfg.string(), "--in-process", "phase", "sideways"});
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, UpInProcessReportsFiveHealthyServices) {
  const auto report = (dir / "up.json").string();
  auto r = arthur_cli({"--in-process", "--report", report, "up", "--duration-ms", "0"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(read_file(report));
  ASSERT_EQ(j.at("services").size(), 5u);
  for (const auto& [name, state] : j.at("services").items()) EXPECT_EQ(state, "up") << name;
  EXPECT_EQ(arthur_cli({"--in-process", "down"}).code, 0);
}

TEST_F(CliTest, UpWithoutBrokerNamesTheVariable) {
  auto r = arthur_cli({"up", "--duration-ms", "0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("ARTHUR_BROKER"), std::string::npos) << r.err;
  ::setenv("ARTHUR_BROKER", "127.0.0.1:1", 1);
  r = arthur_cli({"up", "--duration-ms", "0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("ARTHUR_BROKER"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("127.0.0.1:1"), std::string::npos) << r.err;
  // Nothing can be running against a missing broker, so down still succeeds.
  EXPECT_EQ(arthur_cli({"down"}).code, 0);
}

TEST_F(CliTest, UpAgainstExternalBrokerStopsOnDown) {
  bus::MqttBroker broker;
  const auto url = "127.0.0.1:" + std::to_string(broker.port());
  auto up = std::async(std::launch::async, [&] { return arthur_cli({"--broker", url, "up", "--duration-ms", "20000"}); });
  auto watcher = bus::connect_mqtt(bus::BrokerAddress::parse(url), "test-watcher");
  std::set<std::string> healthy;
  watcher->subscribe(bus::topics::service_status("ws1", "+"), [&](const bus::Envelope& e) {
    if (e.payload.value("state", std::string()) == "up") healthy.insert(e.payload.value("service", std::string()));
  });
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
  while (healthy.size() < 5 && std::chrono::steady_clock::now() < deadline) {
    watcher->poll();
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  EXPECT_EQ(healthy.size(), 5u);
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  EXPECT_EQ(arthur_cli({"--broker", url, "down"}).code, 0);
  ASSERT_EQ(up.wait_for(std::chrono::seconds(10)), std::future_status::ready);
  const auto r = up.get();
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("all services up"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("down requested"), std::string::npos) << r.out;
  EXPECT_EQ(arthur_cli({"--broker", url, "down"}).code, 0);
}

TEST_F(CliTest, UsageErrorsAreStartupFailures) {
  EXPECT_EQ(arthur_cli({}).code, 2);
  EXPECT_EQ(arthur_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(arthur_cli({"--help"}).code, 0);
}

}  // namespace
