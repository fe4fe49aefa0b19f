#pragma once

// Shape prediction by an outside program: `<command> <in.ply> <out.ply>` is
// run through the shell in a scratch directory; the program reads the
// observed cloud from in.ply and must write the predicted cloud to out.ply.

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>

#include "mapnbv/episode.hpp"
#include "mapnbv/io/mesh_io.hpp"

namespace mapnbv::io {

struct PredictorCommandError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

}  // namespace detail

// Each call gets its own numbered subdirectory of `scratch`, kept for
// inspection.
inline ExternalPredictor command_predictor(std::string command, fs::path scratch) {
  auto calls = std::make_shared<int>(0);
  return [command = std::move(command), scratch = std::move(scratch), calls](std::span<const Point3> observed) {
    const fs::path dir = scratch / ("call_" + std::to_string((*calls)++));
    fs::create_directories(dir);
    const fs::path in = dir / "in.ply";
    const fs::path out = dir / "out.ply";
    write_ply(in, observed);
    fs::remove(out);
    const std::string cmd = command + " " + detail::shell_quote(in.string()) + " " + detail::shell_quote(out.string());
    const int rc = std::system(cmd.c_str());
    if (rc != 0) throw PredictorCommandError("predictor command failed (status " + std::to_string(rc) + "): " + cmd);
    if (!fs::exists(out)) throw PredictorCommandError("predictor command wrote no " + out.string());
    return load_point_cloud(out);
  };
}

}  // namespace mapnbv::io
