int a = 0;
int b = 0;
int c = 0;

LOOP(range(1,20));
for(int i=0; i<INT(range(10,20));
             i+=INT(range(2,7))) {
      a++; // Loop A
}

LOOP(range(1,20));
for(int i=0; i<INT(range(10,20));
             i+=INT(range(2,7))) {
      b++; // Loop B
}

LOOP(range(1,20));
for(int i=0; i<INT(range(10,20));
             i+=INT(range(2,7))) {
      c++; // Loop C
}

ASSERT(a > 6 && a < b && c < b);
