#include "annodyn/corpus.hpp"
int main(){return 0;}
