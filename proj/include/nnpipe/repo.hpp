#pragma once

#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "nnpipe/tensor.hpp"

namespace nnpipe {

// Thrown out of blocking waits when the pipeline is flushing or pausing.
class Interrupted : public Error {
 public:
  Interrupted() : Error("interrupted") {}
};

// Capacity-1 mailbox shared by a reposink and a reposrc. Deposits block
// while the cell is full; takes block while it is empty.
class RepoSlot {
 public:
  explicit RepoSlot(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }

  void deposit(Frame frame);
  void close();  // end of stream from the reposink side
  // nullopt once closed and drained. Throws Interrupted when woken.
  std::optional<Frame> take();

  // Wakes every waiter; they throw Interrupted until resume() is called.
  void interrupt();
  void resume();
  bool full() const;

 private:
  std::string name_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::optional<Frame> cell_;
  bool closed_ = false;
  bool interrupted_ = false;
};

// Named slots of one pipeline.
class RepoRegistry {
 public:
  std::shared_ptr<RepoSlot> bind_sink(const std::string& slot, const std::string& element);
  std::shared_ptr<RepoSlot> bind_source(const std::string& slot, const std::string& element);
  std::shared_ptr<RepoSlot> find(const std::string& slot) const;
  void interrupt_all();
  void resume_all();
  void clear();

 private:
  struct Binding {
    std::shared_ptr<RepoSlot> slot;
    std::string sink;
    std::string source;
  };
  Binding& get(const std::string& slot);

  mutable std::mutex mutex_;
  std::map<std::string, Binding> slots_;
};

}  // namespace nnpipe
