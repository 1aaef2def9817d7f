#include <doctest.h>
int dummy_matops = 0;
