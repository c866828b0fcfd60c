#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "crowdnav/telemetry/records.hpp"
#include "crowdnav/task/tasks.hpp"
#include "crowdnav/world/world.hpp"

namespace crowdnav::telemetry {

class TelemetryIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Append-only line log for one session, single writer.
///
/// Every record is written as one complete line with a single write loop on
/// an O_APPEND descriptor, so a crash can only leave a truncated final line.
/// Write failures (e.g. a full disk) do not throw: the sink is marked
/// degraded, further writes are dropped and the session keeps running.
class TelemetrySink {
 public:
  /// Opens (creating or truncating) the log. Throws TelemetryIoError when the
  /// file cannot be created.
  TelemetrySink(const std::filesystem::path& path, int decimation = 1);
  ~TelemetrySink();

  TelemetrySink(const TelemetrySink&) = delete;
  TelemetrySink& operator=(const TelemetrySink&) = delete;

  /// Writes one record line. Returns false when the sink is (or becomes) degraded.
  bool write(const LogRecord& record);

  /// Tick records are only kept every `decimation` ticks.
  bool wants_tick(std::uint64_t tick) const { return tick % static_cast<std::uint64_t>(decimation_) == 0; }

  /// Flushes to stable storage and closes. Idempotent.
  void close();

  bool degraded() const { return degraded_; }
  std::size_t lines_written() const { return lines_; }
  int decimation() const { return decimation_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  int decimation_ = 1;
  bool degraded_ = false;
  std::size_t lines_ = 0;
};

/// Builds the tick record for the current world state.
TickRecord make_tick_record(const world::WorldState& world, const task::TaskState& tasks, double dt);

/// Appends one tick record when the sink's decimation selects this tick.
/// Returns the record that was written, if any.
std::optional<TickRecord> record_tick(TelemetrySink& sink, const world::WorldState& world,
                                      const task::TaskState& tasks, double dt);

}  // namespace crowdnav::telemetry
