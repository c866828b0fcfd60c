#include "crowdnav/telemetry/sink.hpp"

#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <unistd.h>

namespace crowdnav::telemetry {

TelemetrySink::TelemetrySink(const std::filesystem::path& path, int decimation)
    : path_(path), decimation_(decimation < 1 ? 1 : decimation) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw TelemetryIoError("cannot open telemetry log " + path.string() + ": " + std::strerror(errno));
}

TelemetrySink::~TelemetrySink() { close(); }

bool TelemetrySink::write(const LogRecord& record) {
  if (degraded_ || fd_ < 0) return false;
  std::string line = encode(record);
  line.push_back('\n');
  const char* p = line.data();
  std::size_t left = line.size();
  while (left > 0) {
    const ssize_t n = ::write(fd_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      degraded_ = true;
      return false;
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  ++lines_;
  return true;
}

void TelemetrySink::close() {
  if (fd_ < 0) return;
  if (::fsync(fd_) != 0 && errno != EINVAL && errno != EROFS) degraded_ = true;
  ::close(fd_);
  fd_ = -1;
}

TickRecord make_tick_record(const world::WorldState& world, const task::TaskState& tasks, double dt) {
  TickRecord rec;
  rec.tick = world.tick;
  rec.sim_time = world.sim_time(dt);
  rec.phase = std::string(task::to_string(tasks.phase));
  rec.agents.reserve(world.agents.size());
  for (const auto& a : world.agents)
    rec.agents.push_back({a.id, a.kind, a.pose.x, a.pose.y, a.pose.theta, a.velocity.x, a.velocity.y, a.radius});
  return rec;
}

std::optional<TickRecord> record_tick(TelemetrySink& sink, const world::WorldState& world,
                                      const task::TaskState& tasks, double dt) {
  if (!sink.wants_tick(world.tick)) return std::nullopt;
  TickRecord rec = make_tick_record(world, tasks, dt);
  sink.write(rec);
  return rec;
}

}  // namespace crowdnav::telemetry
