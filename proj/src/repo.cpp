#include "nnpipe/repo.hpp"

namespace nnpipe {

void RepoSlot::deposit(Frame frame) {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return !cell_ || interrupted_; });
  if (interrupted_) throw Interrupted();
  cell_ = std::move(frame);
  cv_.notify_all();
}

void RepoSlot::close() {
  std::lock_guard lock(mutex_);
  closed_ = true;
  cv_.notify_all();
}

std::optional<Frame> RepoSlot::take() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return cell_ || closed_ || interrupted_; });
  if (interrupted_) throw Interrupted();
  if (!cell_) return std::nullopt;
  std::optional<Frame> out = std::move(cell_);
  cell_.reset();
  cv_.notify_all();
  return out;
}

void RepoSlot::interrupt() {
  std::lock_guard lock(mutex_);
  interrupted_ = true;
  cv_.notify_all();
}

void RepoSlot::resume() {
  std::lock_guard lock(mutex_);
  interrupted_ = false;
}

bool RepoSlot::full() const {
  std::lock_guard lock(mutex_);
  return cell_.has_value();
}

RepoRegistry::Binding& RepoRegistry::get(const std::string& slot) {
  auto& b = slots_[slot];
  if (!b.slot) b.slot = std::make_shared<RepoSlot>(slot);
  return b;
}

std::shared_ptr<RepoSlot> RepoRegistry::bind_sink(const std::string& slot,
                                                  const std::string& element) {
  std::lock_guard lock(mutex_);
  auto& b = get(slot);
  if (!b.sink.empty() && b.sink != element) {
    throw ValidationError("repo slot '" + slot + "' already has reposink '" + b.sink + "'");
  }
  b.sink = element;
  return b.slot;
}

std::shared_ptr<RepoSlot> RepoRegistry::bind_source(const std::string& slot,
                                                    const std::string& element) {
  std::lock_guard lock(mutex_);
  auto& b = get(slot);
  if (!b.source.empty() && b.source != element) {
    throw ValidationError("repo slot '" + slot + "' already has reposrc '" + b.source + "'");
  }
  b.source = element;
  return b.slot;
}

std::shared_ptr<RepoSlot> RepoRegistry::find(const std::string& slot) const {
  std::lock_guard lock(mutex_);
  auto it = slots_.find(slot);
  return it == slots_.end() ? nullptr : it->second.slot;
}

void RepoRegistry::interrupt_all() {
  std::lock_guard lock(mutex_);
  for (auto& [name, b] : slots_) b.slot->interrupt();
}

void RepoRegistry::resume_all() {
  std::lock_guard lock(mutex_);
  for (auto& [name, b] : slots_) b.slot->resume();
}

void RepoRegistry::clear() {
  std::lock_guard lock(mutex_);
  slots_.clear();
}

}  // namespace nnpipe
