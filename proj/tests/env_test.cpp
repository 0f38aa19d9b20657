#include <gtest/gtest.h>
#include "vtmig/vtmig.hpp"
TEST(Placeholder_env, Todo) { SUCCEED(); }
