int i = INT(range(3, 5));
int count = INT(range(0, 10));
LOOP(range(0, 100000));
while (i < count) {
	 count++;
	 i += 2;
}
