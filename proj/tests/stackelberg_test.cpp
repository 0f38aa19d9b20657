#include <gtest/gtest.h>
#include "vtmig/vtmig.hpp"
TEST(Placeholder_stackelberg, Todo) { SUCCEED(); }
