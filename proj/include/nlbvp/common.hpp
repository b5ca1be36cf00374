#ifndef NLBVP_COMMON_HPP
#define NLBVP_COMMON_HPP

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace nlbvp {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using json = nlohmann::json;

// Exit-code taxonomy shared by the library and the CLI.
enum class ErrorKind {
  validation,  // bad parameters, inadmissible data, schema violations   -> exit 2
  solver,      // iteration failed to converge / numeric breakdown       -> exit 3
  resolution,  // mesh cannot resolve the kernel where it must           -> exit 4
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, json data = json::object())
      : std::runtime_error(what), kind_(kind), data_(std::move(data)) {}

  ErrorKind kind() const { return kind_; }
  const json& data() const { return data_; }

  int exit_code() const {
    switch (kind_) {
      case ErrorKind::validation: return 2;
      case ErrorKind::solver: return 3;
      case ErrorKind::resolution: return 4;
    }
    return 1;
  }

  json to_json() const {
    return json{{"error", what()}, {"exit_code", exit_code()}, {"data", data_}};
  }

 private:
  ErrorKind kind_;
  json data_;
};

[[noreturn]] inline void fail_validation(const std::string& msg, json data = json::object()) {
  throw Error(ErrorKind::validation, msg, std::move(data));
}
[[noreturn]] inline void fail_solver(const std::string& msg, json data = json::object()) {
  throw Error(ErrorKind::solver, msg, std::move(data));
}
[[noreturn]] inline void fail_resolution(const std::string& msg, json data = json::object()) {
  throw Error(ErrorKind::resolution, msg, std::move(data));
}

// 17 significant digits: round-trips doubles and keeps CSV output byte-stable.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Chunked parallel loop. Each index writes only its own slot, so results do
// not depend on the thread count or schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Thread budget: NLBVP_THREADS overrides, otherwise hardware concurrency.
int thread_count();
void set_thread_count(int n);

}  // namespace nlbvp

#endif
