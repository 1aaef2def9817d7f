#include <doctest.h>
int dummy_lqr = 0;
