#pragma once

#include <stdexcept>

namespace ppqkd {

/// A channel or detector configuration that transmits nothing usable
/// (e.g. zero backward efficiency). The CLI maps this to exit status 3.
class DegenerateChannelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File-system failure while writing an output artifact. Exit status 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ppqkd
