#include <gtest/gtest.h>
#include "vtmig/vtmig.hpp"
TEST(Placeholder_baselines, Todo) { SUCCEED(); }
