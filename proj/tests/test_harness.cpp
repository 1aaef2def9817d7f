#include <doctest.h>
int dummy_harness = 0;
