#include <gtest/gtest.h>
#include "vtmig/vtmig.hpp"
TEST(Placeholder_netlink, Todo) { SUCCEED(); }
