// Successive ifs versus an if-else-if chain: the two loops only disagree
// when the loop variable hits a multiple of both 2 and 3.
int a = 0;
int b = 0;
int limit = INT(range(10,20));
int inc = HOLE(INT(range(2,5)));
int start = INT(range(0,3));

LOOP(range(1,20));
for(int i=start; i<limit; i+=inc) {
  // Loop A
  if (i % 2 == 0) a++;
  if (i % 3 == 0) a++;
}

LOOP(range(1,20));
for(int i=start; i<limit; i+=inc) {
  // Loop B
  if (i % 2 == 0) b++;
  else if (i % 3 == 0) b++;
}

ASSERT(a != b);
