#include "cyweb/io.hpp"
int main(){return 0;}
