#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>

#include "support.hpp"

using swarmchat::testing::TempDir;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  Run r;
  auto cmd = std::string("\"") + SWARMCHAT_CLI + "\" " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 512> buf{};
  while (auto n = fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string write(const TempDir& dir, const std::string& name, const std::string& text) {
  auto p = dir.path() / name;
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST(Cli, EmptyScenarioExitsZero) {
  TempDir dir;
  auto r = run("run-scenario \"" + write(dir, "empty.scenario", "") + "\"");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_TRUE(r.out.empty()) << r.out;
}

TEST(Cli, UnknownRobotFailsAtStep) {
  TempDir dir;
  auto script = write(dir, "bad.scenario",
                      "{\"keywords\":\"go\",\"selection\":2,\"modality\":\"Text\",\"robot\":\"TurtleBot 1\"}\n"
                      "{\"keywords\":\"go\",\"selection\":2,\"modality\":\"Text\",\"robot\":\"TurtleBot 9\"}\n");
  auto r = run("run-scenario \"" + script + "\"");
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.out.find("step 2: UnknownRobot"), std::string::npos) << r.out;
}

TEST(Cli, GoldenScenarioReport) {
  auto r = run(std::string("run-scenario \"") + SWARMCHAT_SOURCE_DIR + "/scenarios/golden.scenario\"");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("MS  | run right        | 0.80  | Voice"), std::string::npos) << r.out;
  auto with = run(std::string("--synonyms run-scenario --json \"") + SWARMCHAT_SOURCE_DIR +
                  "/scenarios/golden.scenario\"");
  EXPECT_EQ(with.status, 0) << with.out;
  EXPECT_NE(with.out.find("\"score\": 0.9"), std::string::npos) << with.out;
}

TEST(Cli, BadScriptIsAnError) {
  TempDir dir;
  auto r = run("run-scenario \"" + write(dir, "broken.scenario", "{nope\n") + "\"");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("line 1"), std::string::npos) << r.out;
}
