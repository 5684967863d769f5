#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dyadflow {

// All library failures throw Error. `code` is a stable machine-readable tag
// (e.g. "invalid-cutoff", "insufficient-samples"); `what()` carries context.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// One uniformly sampled scalar recording (force in N, position in m, ...).
struct Channel {
  std::vector<double> samples;
  double fs = 0.0;  // Hz
  std::string label;
};

// One window cut from a channel by epoch_split.
struct Epoch {
  std::vector<double> samples;
  double fs = 0.0;
  std::string parent_trial;
  int window_index = 0;
};

Channel make_channel(std::vector<double> samples, double fs, std::string label = {});

// fs > 0 and every sample finite; throws invalid-channel otherwise.
void validate_channel(const Channel& x);

}  // namespace dyadflow
