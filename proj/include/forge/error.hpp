#pragma once

#include <stdexcept>

namespace forge {

// Exit-code contract for the CLI: 1 usage/config, 2 data, 3 endpoint.

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct endpoint_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace forge
