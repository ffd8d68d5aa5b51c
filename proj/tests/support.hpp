#pragma once

#include <doctest.h>

#include <functional>

#include "cflab/error.hpp"

namespace testing {

// Kind of the cflab::Error thrown by `fn`; fails the test when none is thrown.
inline cflab::ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const cflab::Error& e) {
    return e.kind();
  }
  FAIL("expected a cflab::Error");
  return cflab::ErrorKind::ConfigError;
}

}  // namespace testing
