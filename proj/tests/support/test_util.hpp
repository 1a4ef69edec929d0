#pragma once

#include <doctest.h>

#include "symreg/errors.hpp"

/// Checks that `expr` throws symreg::Error with the given code.
#define CHECK_THROWS_CODE(expr, ecode)                             \
  do {                                                             \
    bool thrown_ = false;                                          \
    try {                                                          \
      (void)(expr);                                                \
    } catch (const symreg::Error& e_) {                            \
      thrown_ = true;                                              \
      CHECK_MESSAGE(e_.code() == (ecode), e_.what());              \
    }                                                              \
    CHECK_MESSAGE(thrown_, "expected symreg::Error from " #expr); \
  } while (0)
