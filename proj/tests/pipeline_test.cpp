#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "helpers.hpp"

namespace nnpipe {
namespace {

TEST(Lifecycle, NullToPlayingPassesThroughReady) {
  auto p = Pipeline::parse("testsrc_tensor info=uint8:1 num_frames=10 ! appsink name=a");
  EXPECT_EQ(p->state(), PipelineState::kNull);
  auto report = p->run_until_eos(std::chrono::seconds(10));
  EXPECT_EQ(p->state(), PipelineState::kEos);
  EXPECT_EQ(report.sink("a")->frames, 10u);
  EXPECT_TRUE(report.sink("a")->eos);
  EXPECT_THROW(p->set_state(PipelineState::kPlaying), Error);
  EXPECT_THROW(p->set_state(PipelineState::kEos), Error);
  p->set_state(PipelineState::kNull);
  EXPECT_EQ(p->state(), PipelineState::kNull);
}

TEST(Lifecycle, ReadyNegotiatesCaps) {
  auto p = Pipeline::parse("testsrc_tensor info=uint8:3:4 ! tensor_transform mode=typecast option=float32 ! nullsink name=n");
  p->set_state(PipelineState::kReady);
  auto dot = p->export_dot();
  EXPECT_NE(dot.find("other/tensor"), std::string::npos) << dot;
  EXPECT_NE(dot.find("float32"), std::string::npos) << dot;
  p->set_state(PipelineState::kNull);
}

TEST(Lifecycle, TopologyIsFrozenWhilePlaying) {
  auto p = Pipeline::parse("testsrc_tensor info=uint8:1 num_frames=100000 framerate=1000/1 ! nullsink name=n",
                           PipelineOptions{true});
  p->set_state(PipelineState::kPlaying);
  EXPECT_THROW(p->add_element("nullsink", "m", {}), Error);
  EXPECT_THROW(p->unlink("testsrc_tensor0", "n"), Error);
  p->set_state(PipelineState::kNull);
}

TEST(Lifecycle, PauseAndRelinkValveBranch) {
  auto p = Pipeline::parse(
      "testsrc_tensor info=uint8:1 fill=counter framerate=100/1 num_frames=60 ! tee name=t "
      "! valve name=v ! appsink name=a  t. ! appsink name=b",
      PipelineOptions{true});
  p->set_state(PipelineState::kPlaying);
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  p->set_state(PipelineState::kReady);
  EXPECT_EQ(p->state(), PipelineState::kReady);
  auto before = p->element_as<AppSink>("a")->frames().size();
  EXPECT_GT(before, 0u);
  EXPECT_LT(before, 60u);

  p->unlink("v", "a");
  p->remove_element("a");
  p->add_element("appsink", "c", {});
  p->link("v", "c");
  auto report = p->run_until_eos(std::chrono::seconds(10));

  // The stream resumes where it paused; no frame is lost or repeated.
  auto b = p->element_as<AppSink>("b")->frames();
  auto c = p->element_as<AppSink>("c")->frames();
  ASSERT_EQ(b.size(), 60u);
  EXPECT_EQ(before + c.size(), 60u);
  ASSERT_FALSE(c.empty());
  EXPECT_EQ(test::ints(c.front().chunks[0])[0], static_cast<int>(before));
  EXPECT_TRUE(report.sink("c")->eos);
}

TEST(Lifecycle, ValveTogglesAtRuntime) {
  auto p = Pipeline::parse(
      "testsrc_tensor info=uint8:1 framerate=200/1 num_frames=100 ! valve name=v drop=true ! appsink name=a",
      PipelineOptions{true});
  p->set_state(PipelineState::kPlaying);
  std::this_thread::sleep_for(std::chrono::milliseconds(150));
  p->set_property("v", "drop", "false");
  auto report = p->run_until_eos(std::chrono::seconds(10));
  auto n = report.sink("a")->frames;
  EXPECT_GT(n, 0u);
  EXPECT_LT(n, 100u);
  EXPECT_EQ(p->graph().find("v")->property("drop"), "false");
}

TEST(Validation, UnlinkedPadsAreRejected) {
  try {
    Pipeline::parse("testsrc_tensor info=uint8:2 ! tensor_split name=s segments=1,1 ! nullsink")
        ->set_state(PipelineState::kReady);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("s.src_1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(Pipeline::parse("testsrc_tensor info=uint8:1 ! identity")->set_state(PipelineState::kReady),
               ValidationError);
}

TEST(Validation, CycleIsRejectedButRepoPairIsNot) {
  EXPECT_THROW(Pipeline::parse("testsrc_tensor info=uint8:1 ! m.sink_0  tensor_mux name=m policy=lockstep ! tee name=t "
                               "! nullsink  t. ! m.sink_1")
                   ->set_state(PipelineState::kReady),
               ValidationError);
  EXPECT_NO_THROW(Pipeline::parse("testsrc_tensor info=uint8:1 ! m.sink_0  tensor_reposrc slot=s info=uint8:1 "
                                  "! m.sink_1  tensor_mux name=m policy=lockstep ! tensor_demux tensorpick=0 "
                                  "! tee name=t ! nullsink  t. ! tensor_reposink slot=s")
                      ->set_state(PipelineState::kReady));
}

TEST(Runtime, ElementErrorStopsPipeline) {
  auto labels = test::temp_path("one_label.txt");
  std::ofstream(labels) << "only\n";
  auto p = Pipeline::parse("testsrc_tensor info=uint8:2 fill=counter num_frames=3 ! tensor_decoder mode=label "
                           "labels=" + labels.string() + " ! nullsink");
  try {
    p->run_until_eos(std::chrono::seconds(5));
    FAIL();
  } catch (const RunError& e) {
    EXPECT_NE(std::string(e.what()).find("tensor_decoder0"), std::string::npos) << e.what();
  }
  EXPECT_EQ(p->state(), PipelineState::kError);
  EXPECT_FALSE(p->error_message().empty());
  EXPECT_THROW(Pipeline::parse("testsrc_tensor info=uint8:2 ! tensor_decoder mode=label "
                               "labels=/nonexistent/labels.txt ! nullsink"),
               ValidationError);
  std::filesystem::remove(labels);
}

TEST(Runtime, TimeoutNamesStarvedPad) {
  auto p = Pipeline::parse(
      "testsrc_tensor info=uint8:1 num_frames=5 framerate=0/1 ! m.sink_0 "
      "tensor_reposrc name=r slot=s info=uint8:1 ! m.sink_1 "
      "tensor_mux name=m policy=lockstep ! tee name=t ! appsink name=a "
      "t. ! tensor_demux tensorpick=0 ! valve drop=true ! tensor_reposink slot=s");
  try {
    p->run_until_eos(std::chrono::milliseconds(500));
    FAIL();
  } catch (const RunError& e) {
    std::string m = e.what();
    EXPECT_NE(m.find("timed out"), std::string::npos) << m;
    EXPECT_NE(m.find("r.src"), std::string::npos) << m;
    EXPECT_EQ(e.report().sink("a")->frames, 1u);
    EXPECT_FALSE(e.report().progress.empty());
  }
  EXPECT_EQ(p->state(), PipelineState::kError);
}

TEST(Runtime, UnpacedRunsAreDeterministic) {
  const char* desc =
      "testsrc_tensor info=uint8:4 fill=counter num_frames=50 framerate=30/1 ! queue ! m.sink_0 "
      "testsrc_tensor info=uint8:4 fill=ramp num_frames=20 framerate=10/1 ! queue ! m.sink_1 "
      "tensor_mux name=m policy=fastest ! appsink name=a";
  auto a = test::run(desc).frames("a");
  for (int i = 0; i < 5; ++i) {
    auto b = test::run(desc).frames("a");
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) ASSERT_TRUE(a[k].same_content(b[k]));
  }
}

TEST(Runtime, ReportCountsQueues) {
  auto r = test::run("testsrc_tensor info=uint8:1 num_frames=20 ! queue name=q max_size=4 ! nullsink name=n");
  ASSERT_EQ(r.report.queues.size(), 1u);
  EXPECT_EQ(r.report.queues[0].name, "q");
  EXPECT_EQ(r.report.queues[0].capacity, 4u);
  EXPECT_GE(r.report.queues[0].max_occupancy, 1u);
  EXPECT_EQ(r.report.sink("n")->frames, 20u);
  EXPECT_EQ(r.report.sink("missing"), nullptr);
}

}  // namespace
}  // namespace nnpipe
