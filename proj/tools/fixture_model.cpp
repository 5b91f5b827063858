// Stand-in model speaking the line protocol: handshake, then one JSON
// response per JSON request. Flags select the behavior under test.
//
//   --label L          answer every request with label L (default "positive")
//   --answer A         answer with answer_text A instead
//   --echo-field F     label is the request's field F
//   --answer-field F   answer_text is the request's field F
//   --sleep-ms N       wait N ms before each response
//   --startup-ms N     wait N ms before the handshake
//   --ballast-mib N    hold N MiB of touched memory for the whole run
//   --detect-overlap   exit 4 if a request arrives before the previous answer
//   --crash-on-uid U   exit 3 on receiving request U
//   --malformed-at N   the N-th response is not JSON
//   --no-handshake     never send the handshake
#include <poll.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace {

struct Options {
  std::string label = "positive";
  std::string answer;
  std::string echo_field;
  std::string answer_field;
  long sleep_ms = 0;
  long startup_ms = 0;
  long ballast_mib = 0;
  bool detect_overlap = false;
  std::string crash_uid;
  long malformed_at = 0;
  bool handshake = true;
};

[[noreturn]] void usage(const char* flag) {
  std::cerr << "dyna_fixture_model: bad or incomplete flag " << flag << '\n';
  std::exit(2);
}

Options parse(int argc, char** argv) {
  Options o;
  for (int i = 1; i < argc; ++i) {
    const std::string flag = argv[i];
    auto value = [&]() -> std::string {
      if (i + 1 >= argc) usage(argv[i]);
      return argv[++i];
    };
    auto number = [&]() -> long {
      const std::string v = value();
      char* end = nullptr;
      const long n = std::strtol(v.c_str(), &end, 10);
      if (v.empty() || *end != '\0' || n < 0) usage(flag.c_str());
      return n;
    };
    if (flag == "--label") o.label = value();
    else if (flag == "--answer") o.answer = value();
    else if (flag == "--echo-field") o.echo_field = value();
    else if (flag == "--answer-field") o.answer_field = value();
    else if (flag == "--sleep-ms") o.sleep_ms = number();
    else if (flag == "--startup-ms") o.startup_ms = number();
    else if (flag == "--ballast-mib") o.ballast_mib = number();
    else if (flag == "--detect-overlap") o.detect_overlap = true;
    else if (flag == "--crash-on-uid") o.crash_uid = value();
    else if (flag == "--malformed-at") o.malformed_at = number();
    else if (flag == "--no-handshake") o.handshake = false;
    else usage(flag.c_str());
  }
  return o;
}

// True when another request is already waiting on standard input.
bool input_pending() {
  if (std::cin.rdbuf()->in_avail() > 0) return true;
  pollfd pfd{STDIN_FILENO, POLLIN, 0};
  return ::poll(&pfd, 1, 0) > 0 && (pfd.revents & POLLIN);
}

std::string field_of(const nlohmann::json& req, const std::string& name) {
  auto it = req.find(name);
  return it != req.end() && it->is_string() ? it->get<std::string>() : std::string();
}

}  // namespace

int main(int argc, char** argv) {
  const Options opt = parse(argc, argv);
  std::ios::sync_with_stdio(false);

  std::vector<char> ballast;
  if (opt.ballast_mib > 0) {
    ballast.assign(static_cast<std::size_t>(opt.ballast_mib) << 20, '\0');
    // Touch every page so it is resident.
    for (std::size_t i = 0; i < ballast.size(); i += 4096) ballast[i] = static_cast<char>(i);
  }
  if (opt.startup_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(opt.startup_ms));

  if (!opt.handshake) {
    std::string ignored;
    while (std::getline(std::cin, ignored)) {
    }
    return 0;
  }
  std::cout << R"({"status":"ready"})" << '\n' << std::flush;

  std::string line;
  long count = 0;
  while (std::getline(std::cin, line)) {
    ++count;
    const auto req = nlohmann::json::parse(line, nullptr, false);
    if (!req.is_object()) {
      std::cerr << "dyna_fixture_model: request is not a JSON object\n";
      return 5;
    }
    const std::string uid = field_of(req, "uid");
    if (!opt.crash_uid.empty() && uid == opt.crash_uid) return 3;
    if (opt.detect_overlap) {
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
      if (input_pending()) {
        std::cerr << "dyna_fixture_model: overlapping request after " << uid << '\n';
        return 4;
      }
    }
    if (opt.sleep_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(opt.sleep_ms));
    if (opt.malformed_at > 0 && count == opt.malformed_at) {
      std::cout << "not a json line" << '\n' << std::flush;
      continue;
    }
    nlohmann::json resp{{"uid", uid}};
    if (!opt.answer_field.empty()) {
      resp["answer_text"] = field_of(req, opt.answer_field);
    } else if (!opt.answer.empty()) {
      resp["answer_text"] = opt.answer;
    } else if (!opt.echo_field.empty()) {
      resp["label"] = field_of(req, opt.echo_field);
    } else {
      resp["label"] = opt.label;
    }
    std::cout << resp.dump() << '\n' << std::flush;
  }
  return 0;
}
