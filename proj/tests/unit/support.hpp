// Copyright (c) 2026 The UTS Pipeline Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>

#include "uts/matrix.hpp"
#include "uts/rng.hpp"

namespace testutil {

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// True iff fn() throws a std::exception whose message contains needle.
template <typename Fn>
bool throws_with_substring(Fn&& fn, const std::string& needle) {
  try {
    fn();
  } catch (const std::exception& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& hint) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("uts_test_" + hint + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string write_file(const TempDir& dir, const std::string& name,
                              const std::string& content) {
  const std::string path = dir.file(name);
  std::ofstream out(path);
  out << content;
  return path;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline uts::Matrix random_matrix(int rows, int cols, uts::Rng& rng, double scale = 1.0) {
  uts::Matrix m(rows, cols);
  for (double& v : m.data()) v = scale * rng.normal();
  return m;
}

// Central finite differences against analytic gradients for a loss that is
// a function of named input tensors. Missing analytic entries are treated
// as zero (parameters the loss does not touch).
struct GradCheck {
  double step = 1e-5;
  double tolerance = 1e-4;
  double worst = 0.0;
  bool ok = true;

  void run(std::map<std::string, uts::Matrix> inputs,
           const std::map<std::string, uts::Matrix>& analytic,
           const std::function<double(const std::map<std::string, uts::Matrix>&)>& loss_fn) {
    for (auto& [name, tensor] : inputs) {
      const uts::Matrix* grad = nullptr;
      if (auto it = analytic.find(name); it != analytic.end()) grad = &it->second;
      for (std::size_t i = 0; i < tensor.size(); ++i) {
        const double saved = tensor.data()[i];
        tensor.data()[i] = saved + step;
        const double up = loss_fn(inputs);
        tensor.data()[i] = saved - step;
        const double down = loss_fn(inputs);
        tensor.data()[i] = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double analytic_v = grad ? grad->data()[i] : 0.0;
        const double rel = std::abs(analytic_v - numeric) /
                           std::max({std::abs(analytic_v), std::abs(numeric), 1e-6});
        worst = std::max(worst, rel);
        if (rel > tolerance) ok = false;
      }
    }
  }
};

}  // namespace testutil
