int init = INT(range(-100, 100));
int v1 = INT(range(-100, 100));
int v2 = INT(range(-100, 100));
int v3 = INT(range(-100, 100));
boolean cond = BOOLEAN();
int x = init;
if (cond) {
  x += v1;
  x -= v2;
} else {
  x *= v3;
}
int y = x + 1;
