#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "crowdnav/session/protocol.hpp"

namespace crowdnav::session {

/// Hand-off between one session worker and any number of attached clients.
///
/// The worker publishes encoded server frames; clients read everything after
/// their cursor and get a notifier call whenever something new arrives. Keys
/// travel the other way: realtime workers sample the latest key state,
/// lockstep workers block until a client acknowledges the current tick.
class SessionChannel {
 public:
  using Notifier = std::function<void()>;

  explicit SessionChannel(std::string hello, std::size_t backlog = 512);

  // Worker side.
  void publish(std::string frame, bool snapshot);
  /// Publishes the final frame; readers see `ended` afterwards.
  void close(std::string end_frame);
  AvatarCommand current_keys() const;
  /// Lockstep: waits for a keys message acknowledging `tick`. nullopt on stop.
  std::optional<AvatarCommand> wait_keys(std::uint64_t tick);
  /// Sleeps until `deadline` or a stop request. Returns false when stopped.
  bool sleep_until(std::chrono::steady_clock::time_point deadline);

  void request_stop();
  bool stop_requested() const { return stop_.load(); }

  // Client side.
  struct Attachment {
    std::uint64_t token = 0;
    std::uint64_t cursor = 0;
    std::string hello;
    std::optional<std::string> snapshot;  // latest, if any
    bool ended = false;
  };
  Attachment attach(Notifier notify);
  void detach(std::uint64_t token);

  /// Frames published after `cursor` (advanced in place). When the reader
  /// fell behind the backlog, older frames are skipped.
  std::vector<std::string> read(std::uint64_t& cursor, bool& ended) const;
  void submit(const KeysMessage& keys);

  std::size_t attached() const;

 private:
  void notify_all();

  const std::string hello_;
  const std::size_t backlog_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::pair<std::uint64_t, std::string>> frames_;
  std::uint64_t next_seq_ = 1;
  std::optional<std::string> latest_snapshot_;
  bool ended_ = false;
  AvatarCommand keys_{};
  std::optional<std::pair<std::uint64_t, AvatarCommand>> lockstep_keys_;
  std::atomic<bool> stop_{false};
  std::map<std::uint64_t, Notifier> notifiers_;
  std::uint64_t next_token_ = 1;
};

}  // namespace crowdnav::session
