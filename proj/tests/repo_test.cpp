#include <gtest/gtest.h>

#include <thread>

#include "helpers.hpp"
#include "nnpipe/repo.hpp"

namespace nnpipe {
namespace {

Frame tagged(int v) {
  Frame f;
  f.timestamp_ns = static_cast<std::uint64_t>(v);
  f.chunks.push_back(Chunk::adopt(test::bytes({v})));
  return f;
}

TEST(RepoSlot, DepositThenTake) {
  RepoSlot s("x");
  EXPECT_FALSE(s.full());
  s.deposit(tagged(4));
  EXPECT_TRUE(s.full());
  auto f = s.take();
  ASSERT_TRUE(f);
  EXPECT_EQ(f->timestamp_ns, 4u);
  EXPECT_FALSE(s.full());
}

TEST(RepoSlot, DepositBlocksWhileFull) {
  RepoSlot s("x");
  s.deposit(tagged(1));
  std::atomic<bool> second_done{false};
  std::thread t([&] {
    s.deposit(tagged(2));
    second_done = true;
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(30));
  EXPECT_FALSE(second_done);
  EXPECT_EQ(s.take()->timestamp_ns, 1u);
  t.join();
  EXPECT_TRUE(second_done);
  EXPECT_EQ(s.take()->timestamp_ns, 2u);
}

TEST(RepoSlot, CloseDrainsThenEnds) {
  RepoSlot s("x");
  s.deposit(tagged(9));
  s.close();
  EXPECT_TRUE(s.take());
  EXPECT_FALSE(s.take());
}

TEST(RepoSlot, InterruptWakesWaiters) {
  RepoSlot s("x");
  std::atomic<bool> interrupted{false};
  std::thread t([&] {
    try {
      s.take();
    } catch (const Interrupted&) {
      interrupted = true;
    }
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  s.interrupt();
  t.join();
  EXPECT_TRUE(interrupted);
  EXPECT_THROW(s.take(), Interrupted);
  s.resume();
  s.deposit(tagged(3));
  EXPECT_EQ(s.take()->timestamp_ns, 3u);
}

TEST(RepoRegistry, PairsByName) {
  RepoRegistry r;
  auto a = r.bind_sink("loop", "sink0");
  auto b = r.bind_source("loop", "src0");
  EXPECT_EQ(a, b);
  EXPECT_EQ(r.find("loop"), a);
  EXPECT_EQ(r.find("other"), nullptr);
  EXPECT_THROW(r.bind_sink("loop", "sink1"), ValidationError);
  EXPECT_THROW(r.bind_source("loop", "src1"), ValidationError);
  r.clear();
  EXPECT_EQ(r.find("loop"), nullptr);
}

TEST(RepoPipeline, BootstrapFrameIsZero) {
  auto r = test::run(
      "testsrc_tensor info=uint8:1 fill=ramp start=1 num_frames=3 framerate=0/1 ! m.sink_0 "
      "tensor_reposrc slot=s info=uint8:1 ! m.sink_1 "
      "tensor_mux name=m policy=lockstep ! tee name=t ! appsink name=a "
      "t. ! tensor_demux tensorpick=0 ! tensor_reposink slot=s");
  auto frames = r.frames("a");
  ASSERT_EQ(frames.size(), 3u);
  // The second tensor is the previous frame's first tensor, zero at first.
  std::vector<int> fed, first;
  for (auto& f : frames) {
    first.push_back(test::ints(f.chunks[0])[0]);
    fed.push_back(test::ints(f.chunks[1])[0]);
  }
  EXPECT_EQ(first, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(fed, (std::vector<int>{0, 1, 2}));
}

TEST(RepoPipeline, UnpairedSlotIsRejected) {
  EXPECT_THROW(Pipeline::parse("tensor_reposrc slot=nope info=uint8:1 ! nullsink")
                   ->set_state(PipelineState::kReady),
               ValidationError);
}

}  // namespace
}  // namespace nnpipe
