#pragma once

#include <gtest/gtest.h>

#include "motionalign/error.hpp"

#define EXPECT_ERROR_KIND(statement, expected_kind)                                    \
  do {                                                                                 \
    try {                                                                              \
      statement;                                                                       \
      ADD_FAILURE() << "expected " << motionalign::to_string(expected_kind);           \
    } catch (const motionalign::Error& e) {                                            \
      EXPECT_EQ(e.kind(), expected_kind) << e.what();                                  \
    }                                                                                  \
  } while (false)
