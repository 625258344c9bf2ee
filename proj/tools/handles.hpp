#pragma once

// Thin RAII wrappers over the C handles. The CLI talks to the library only
// through fossils.h.

#include <memory>
#include <stdexcept>
#include <string>

#include "fossils/fossils.h"

namespace cli {

struct CallError : std::runtime_error {
  CallError(fls_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
  fls_status status;
};

inline void check(fls_status s) {
  if (s != FLS_OK) throw CallError(s, fls_last_error());
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const noexcept { Destroy(p); }
};

using Matrix = std::unique_ptr<fls_matrix, Deleter<fls_matrix, fls_matrix_destroy>>;
using Config = std::unique_ptr<fls_config, Deleter<fls_config, fls_config_destroy>>;
using Problem = std::unique_ptr<fls_problem, Deleter<fls_problem, fls_problem_destroy>>;
using Result = std::unique_ptr<fls_result, Deleter<fls_result, fls_result_destroy>>;
using Evaluator = std::unique_ptr<fls_evaluator, Deleter<fls_evaluator, fls_evaluator_destroy>>;

}  // namespace cli
