#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "helpers.hpp"

namespace nnpipe {
namespace {

struct Result {
  int code;
  std::string out;
};

Result cli(const std::string& args) {
  std::string cmd = std::string(NNPIPE_CLI) + " " + args + " 2>&1";
  Result r{-1, {}};
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

TEST(Cli, RunSucceeds) {
  auto r = cli("run 'testsrc_tensor info=uint8:4 num_frames=10 ! nullsink name=n' --stats");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("\"frames\": 10"), std::string::npos) << r.out;
}

TEST(Cli, ParseErrorExitsTwoWithCaret) {
  auto r = cli("run 'testsrc_tensor ! ! nullsink'");
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("column 18"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find(std::string(17 + 2, ' ') + "^"), std::string::npos) << r.out;
}

TEST(Cli, ValidationErrorExitsTwo) {
  EXPECT_EQ(cli("run 'testsrc_tensor info=uint8:2 ! other/tensor,type=int8 ! nullsink' --quiet").code, 2);
}

TEST(Cli, RuntimeErrorExitsOne) {
  auto r = cli("run 'testsrc_tensor info=uint8:1 num_frames=5 framerate=0/1 ! m.sink_0 "
               "tensor_reposrc slot=s info=uint8:1 ! m.sink_1 tensor_mux name=m policy=lockstep "
               "! tensor_demux tensorpick=0 ! valve drop=true ! tensor_reposink slot=s' --timeout 0.3 --quiet");
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_NE(r.out.find("timed out"), std::string::npos) << r.out;
}

TEST(Cli, WritesDot) {
  auto path = test::temp_path("cli.dot");
  auto r = cli("run 'testsrc_tensor info=uint8:1 num_frames=1 ! nullsink' --quiet --dot " + path.string());
  EXPECT_EQ(r.code, 0) << r.out;
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str().rfind("digraph", 0), 0u);
  EXPECT_NE(ss.str().find("other/tensor"), std::string::npos);
  std::filesystem::remove(path);
}

TEST(Cli, Bench) {
  auto r = cli("bench --single 28.0,10.8 --multi 11.0,7.0 --hw 1");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("+4.10%"), std::string::npos) << r.out;
  EXPECT_NE(cli("bench --single 0,1 --multi 1,1 --hw 1").code, 0);
}

TEST(Cli, ListsElements) {
  auto r = cli("elements");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("tensor_aggregator"), std::string::npos);
  EXPECT_NE(r.out.find("toy_dense"), std::string::npos);
}

}  // namespace
}  // namespace nnpipe
