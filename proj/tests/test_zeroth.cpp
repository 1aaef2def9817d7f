#include <doctest.h>
int dummy_zeroth = 0;
