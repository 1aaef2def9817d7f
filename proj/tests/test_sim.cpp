#include <doctest.h>
int dummy_sim = 0;
