#include "dynaboard/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "dynaboard/aggregate.hpp"
#include "dynaboard/error.hpp"
#include "dynaboard/serialize.hpp"
#include "dynaboard/weights.hpp"

namespace fs = std::filesystem;

namespace dynaboard {

namespace {

[[noreturn]] void io_error(const std::string& what, const fs::path& path) {
  throw Error(Errc::kIoError, what + " '" + path.string() + "': " + std::strerror(errno),
              path.string());
}

class Fd {
 public:
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const noexcept { return fd_; }

 private:
  int fd_;
};

void write_all(int fd, const std::string& data, const fs::path& path) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_error("cannot write", path);
    }
    done += static_cast<std::size_t>(n);
  }
}

std::string read_fd(int fd, const fs::path& path) {
  std::string out;
  char buf[65536];
  for (;;) {
    const ssize_t n = ::read(fd, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_error("cannot read", path);
    }
    if (n == 0) break;
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

void lock_fd(int fd, int op, const fs::path& path) {
  while (::flock(fd, op) != 0) {
    if (errno != EINTR) io_error("cannot lock", path);
  }
}

std::string read_text(const fs::path& path) {
  Fd fd(::open(path.c_str(), O_RDONLY | O_CLOEXEC));
  if (fd.get() < 0) {
    if (errno == ENOENT) {
      throw Error(Errc::kNotFound, "no such file '" + path.string() + "'", path.string());
    }
    io_error("cannot open", path);
  }
  return read_fd(fd.get(), path);
}

// Temp file in the target directory, synced, then renamed over the target.
void write_atomic(const fs::path& path, const std::string& content) {
  static std::atomic<unsigned> counter{0};
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(Errc::kIoError, "cannot create '" + path.parent_path().string() + "'");
  const fs::path tmp = path.string() + ".tmp-" + std::to_string(::getpid()) + "-" +
                       std::to_string(counter++);
  {
    Fd fd(::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644));
    if (fd.get() < 0) io_error("cannot create", tmp);
    try {
      write_all(fd.get(), content, tmp);
      if (::fsync(fd.get()) != 0) io_error("cannot sync", tmp);
    } catch (...) {
      ::unlink(tmp.c_str());
      throw;
    }
  }
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    const int err = errno;
    ::unlink(tmp.c_str());
    errno = err;
    io_error("cannot rename onto", path);
  }
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::kParseError, path.string() + ": " + e.what(), path.string());
  }
}

template <class T>
T read_document(const fs::path& path) {
  const Json j = read_json(path);
  try {
    return j.get<T>();
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message(), e.subject());
  }
}

void validate_record(const MetricRecord& r) {
  const std::pair<const char*, const std::string*> ids[] = {
      {"task_id", &r.task_id},
      {"model_id", &r.model_id},
      {"dataset_id", &r.dataset_id},
      {"metric_id", &r.metric_id}};
  for (const auto& [name, value] : ids) {
    if (value->empty()) {
      throw Error(Errc::kValidationError, std::string(name) + " must be non-empty", name);
    }
  }
  if (!std::isfinite(r.value)) {
    throw Error(Errc::kValidationError,
                "value for (" + r.model_id + ", " + r.dataset_id + ", " + r.metric_id +
                    ") is not finite",
                "value");
  }
}

std::string snapshot_stem(Timestamp t) {
  std::string s = format_iso8601(t);
  std::replace(s.begin(), s.end(), ':', '-');
  return s;
}

}  // namespace

void check_id(const std::string& id, const std::string& field) {
  const bool ok = !id.empty() && id.front() != '.' &&
                  std::all_of(id.begin(), id.end(), [](char c) {
                    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                           c == '.';
                  });
  if (!ok) {
    throw Error(Errc::kValidationError,
                field + " '" + id + "' may only contain letters, digits, '_', '-', and '.'", field);
  }
}

std::vector<MetricRecord> records_of(const LatestRecords& latest) {
  std::vector<MetricRecord> out;
  out.reserve(latest.size());
  for (const auto& [key, r] : latest) out.push_back(r);
  return out;
}

Store::Store(fs::path root) : root_(std::move(root)) {}

Store Store::from_env(const fs::path& fallback) {
  if (const char* env = std::getenv("DYNA_DATA_DIR"); env && *env) return Store(env);
  return Store(fallback);
}

std::vector<TaskConfig> Store::list_tasks() const {
  std::vector<TaskConfig> out;
  const fs::path dir = root_ / "tasks";
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") out.push_back(read_document<TaskConfig>(entry.path()));
  }
  std::sort(out.begin(), out.end(),
            [](const TaskConfig& a, const TaskConfig& b) { return a.task_id < b.task_id; });
  return out;
}

TaskConfig Store::load_task(const std::string& task_id) const {
  check_id(task_id, "task_id");
  const fs::path path = root_ / "tasks" / (task_id + ".json");
  std::error_code ec;
  if (!fs::exists(path, ec)) {
    throw Error(Errc::kNotFound, "unknown task '" + task_id + "'", task_id);
  }
  return read_document<TaskConfig>(path);
}

void Store::save_task(const TaskConfig& task) {
  task.validate();
  check_id(task.task_id, "task_id");
  write_atomic(root_ / "tasks" / (task.task_id + ".json"), Json(task).dump(2) + "\n");
}

std::vector<GoldExample> Store::load_dataset(const DatasetRef& dataset) const {
  fs::path path = dataset.path.empty() ? fs::path(dataset.dataset_id + ".jsonl") : fs::path(dataset.path);
  if (path.is_relative()) path = root_ / "datasets" / path;
  try {
    return read_dataset_file(path.string());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message(), e.subject());
  }
}

DatasetMap Store::load_datasets(const TaskConfig& task) const {
  DatasetMap out;
  for (const auto& d : task.datasets) out.emplace(d.dataset_id, load_dataset(d));
  return out;
}

std::vector<ModelEntry> Store::list_models() const {
  std::vector<ModelEntry> out;
  const fs::path dir = root_ / "models";
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") out.push_back(read_document<ModelEntry>(entry.path()));
  }
  std::sort(out.begin(), out.end(),
            [](const ModelEntry& a, const ModelEntry& b) { return a.model_id < b.model_id; });
  return out;
}

bool Store::has_model(const std::string& model_id) const {
  check_id(model_id, "model_id");
  std::error_code ec;
  return fs::exists(root_ / "models" / (model_id + ".json"), ec);
}

ModelEntry Store::load_model(const std::string& model_id) const {
  if (!has_model(model_id)) {
    throw Error(Errc::kNotFound, "unknown model '" + model_id + "'", model_id);
  }
  return read_document<ModelEntry>(root_ / "models" / (model_id + ".json"));
}

void Store::save_model(const ModelEntry& model) {
  model.validate();
  check_id(model.model_id, "model_id");
  write_atomic(root_ / "models" / (model.model_id + ".json"), Json(model).dump(2) + "\n");
}

fs::path Store::results_path() const { return root_ / "results" / "records.jsonl"; }

std::size_t Store::append_records(std::span<const MetricRecord> records) {
  for (const auto& r : records) validate_record(r);
  if (records.empty()) return line_count();
  std::string payload;
  for (const auto& r : records) {
    payload += Json(r).dump();
    payload += '\n';
  }

  const fs::path path = results_path();
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  Fd fd(::open(path.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644));
  if (fd.get() < 0) io_error("cannot open", path);
  lock_fd(fd.get(), LOCK_EX, path);
  struct stat st {};
  if (::fstat(fd.get(), &st) != 0) io_error("cannot stat", path);
  const off_t original_size = st.st_size;
  try {
    write_all(fd.get(), payload, path);
    if (::fsync(fd.get()) != 0) io_error("cannot sync", path);
  } catch (...) {
    // Leave the log exactly as it was.
    if (::ftruncate(fd.get(), original_size) == 0) ::fsync(fd.get());
    throw;
  }
  if (::lseek(fd.get(), 0, SEEK_SET) < 0) io_error("cannot seek", path);
  const std::string all = read_fd(fd.get(), path);
  return static_cast<std::size_t>(std::count(all.begin(), all.end(), '\n'));
}

std::vector<MetricRecord> Store::read_records() const {
  const fs::path path = results_path();
  Fd fd(::open(path.c_str(), O_RDONLY | O_CLOEXEC));
  if (fd.get() < 0) {
    if (errno == ENOENT) return {};
    io_error("cannot open", path);
  }
  lock_fd(fd.get(), LOCK_SH, path);
  const std::string text = read_fd(fd.get(), path);
  ::flock(fd.get(), LOCK_UN);

  std::vector<MetricRecord> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    try {
      out.push_back(Json::parse(line).get<MetricRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kParseError, path.string() + " " + where + ": " + e.what(), where);
    } catch (const Error& e) {
      throw Error(Errc::kParseError, path.string() + " " + where + ": " + e.message(), where);
    }
  }
  return out;
}

std::size_t Store::line_count() const {
  const fs::path path = results_path();
  Fd fd(::open(path.c_str(), O_RDONLY | O_CLOEXEC));
  if (fd.get() < 0) {
    if (errno == ENOENT) return 0;
    io_error("cannot open", path);
  }
  lock_fd(fd.get(), LOCK_SH, path);
  const std::string text = read_fd(fd.get(), path);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

LatestRecords Store::latest_records(const std::string& task_id,
                                    std::optional<Timestamp> as_of) const {
  LatestRecords out;
  for (auto& r : read_records()) {
    if (r.task_id != task_id) continue;
    if (as_of && r.measured_at > *as_of) continue;
    out.insert_or_assign(CellKey{r.model_id, r.dataset_id, r.metric_id}, std::move(r));
  }
  return out;
}

fs::path Store::snapshot_leaderboard(const TaskConfig& task, const Leaderboard& board) {
  if (board.rows.empty()) {
    throw Error(Errc::kValidationError, "a snapshot needs at least one row", "rows");
  }
  if (board.weight_spec.metric_weights.empty() || board.weight_spec.dataset_weights.empty()) {
    throw Error(Errc::kValidationError, "a snapshot needs the weight spec it was scored with",
                "weight_spec");
  }
  check_id(task.task_id, "task_id");
  Json doc = leaderboard_json(board);
  doc["task"] = task;
  const fs::path dir = root_ / "snapshots" / task.task_id;
  const std::string stem = snapshot_stem(board.timestamp);
  fs::path path = dir / (stem + ".json");
  std::error_code ec;
  for (int i = 1; fs::exists(path, ec); ++i) {
    path = dir / (stem + "-" + std::to_string(i) + ".json");
  }
  write_atomic(path, doc.dump(2) + "\n");
  return path;
}

Snapshot Store::load_snapshot(const fs::path& path) {
  const Json doc = read_json(path);
  try {
    Snapshot s;
    s.task = doc.at("task").get<TaskConfig>();
    s.board.task_id = doc.at("task_id").get<std::string>();
    s.board.rows = doc.at("rows").get<std::vector<LeaderboardRow>>();
    s.board.exchange_rates = doc.at("exchange_rates").get<ExchangeRateTable>();
    for (const auto& [id, rate] : doc.at("effective_exchange_rates").items()) {
      s.board.effective_exchange_rates.emplace(
          id, rate.is_null() ? std::numeric_limits<double>::infinity() : rate.get<double>());
    }
    s.board.warnings = doc.at("warnings").get<std::vector<std::string>>();
    s.board.weight_spec = doc.at("weight_spec").get<WeightSpec>();
    s.board.timestamp = parse_iso8601(doc.at("timestamp").get<std::string>());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParseError, path.string() + ": " + e.what(), path.string());
  }
}

ScoredModels rescore_snapshot(const Snapshot& snapshot) {
  std::vector<RawModelValues> raw;
  for (const auto& row : snapshot.board.rows) raw.push_back({row.model_id, row.raw_values});
  std::sort(raw.begin(), raw.end(),
            [](const RawModelValues& a, const RawModelValues& b) { return a.model_id < b.model_id; });
  const auto goods = to_goods(raw, snapshot.task);
  return score_models(goods, snapshot.task,
                      normalize_weights(snapshot.board.weight_spec.metric_weights));
}

}  // namespace dynaboard
