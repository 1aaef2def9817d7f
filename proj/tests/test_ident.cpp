#include <doctest.h>
int dummy_ident = 0;
