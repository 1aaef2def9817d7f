#include <doctest.h>
int dummy_sgd = 0;
