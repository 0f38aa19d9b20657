#include <gtest/gtest.h>
#include "vtmig/vtmig.hpp"
TEST(Placeholder_gcn, Todo) { SUCCEED(); }
