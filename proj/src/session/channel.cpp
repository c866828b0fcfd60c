#include "crowdnav/session/channel.hpp"

namespace crowdnav::session {

SessionChannel::SessionChannel(std::string hello, std::size_t backlog) : hello_(std::move(hello)), backlog_(backlog) {}

void SessionChannel::publish(std::string frame, bool snapshot) {
  {
    std::lock_guard lock(mutex_);
    if (ended_) return;
    if (snapshot) latest_snapshot_ = frame;
    frames_.emplace_back(next_seq_++, std::move(frame));
    while (frames_.size() > backlog_) frames_.pop_front();
  }
  notify_all();
}

void SessionChannel::close(std::string end_frame) {
  {
    std::lock_guard lock(mutex_);
    if (ended_) return;
    frames_.emplace_back(next_seq_++, std::move(end_frame));
    ended_ = true;
  }
  notify_all();
}

void SessionChannel::notify_all() {
  std::vector<Notifier> targets;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [token, fn] : notifiers_) targets.push_back(fn);
  }
  for (auto& fn : targets) fn();
}

AvatarCommand SessionChannel::current_keys() const {
  std::lock_guard lock(mutex_);
  return keys_;
}

std::optional<AvatarCommand> SessionChannel::wait_keys(std::uint64_t tick) {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return stop_.load() || (lockstep_keys_ && lockstep_keys_->first == tick); });
  if (stop_.load()) return std::nullopt;
  const AvatarCommand cmd = lockstep_keys_->second;
  lockstep_keys_.reset();
  return cmd;
}

bool SessionChannel::sleep_until(std::chrono::steady_clock::time_point deadline) {
  std::unique_lock lock(mutex_);
  return !cv_.wait_until(lock, deadline, [&] { return stop_.load(); });
}

void SessionChannel::request_stop() {
  {
    std::lock_guard lock(mutex_);
    stop_.store(true);
  }
  cv_.notify_all();
}

SessionChannel::Attachment SessionChannel::attach(Notifier notify) {
  std::lock_guard lock(mutex_);
  Attachment a;
  a.token = next_token_++;
  a.cursor = next_seq_ - 1;
  a.hello = hello_;
  a.snapshot = latest_snapshot_;
  a.ended = ended_;
  notifiers_.emplace(a.token, std::move(notify));
  return a;
}

void SessionChannel::detach(std::uint64_t token) {
  std::lock_guard lock(mutex_);
  notifiers_.erase(token);
}

std::vector<std::string> SessionChannel::read(std::uint64_t& cursor, bool& ended) const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [seq, frame] : frames_) {
    if (seq <= cursor) continue;
    out.push_back(frame);
    cursor = seq;
  }
  ended = ended_ && cursor + 1 >= next_seq_;
  return out;
}

void SessionChannel::submit(const KeysMessage& keys) {
  {
    std::lock_guard lock(mutex_);
    keys_ = keys.command;
    if (keys.ack) lockstep_keys_ = std::make_pair(*keys.ack, keys.command);
  }
  cv_.notify_all();
}

std::size_t SessionChannel::attached() const {
  std::lock_guard lock(mutex_);
  return notifiers_.size();
}

}  // namespace crowdnav::session
