package org.example.arrays;

public class ArraysAndVarargs {
    public ArraysAndVarargs(String... names) {
    }

    public static void main(String[] args) {
        System.out.println(args.length);
    }

    public int first(int values[]) {
        return values[0];
    }

    public byte[] copy(byte[] src, int off, int len) {
        byte[] out = new byte[len];
        System.arraycopy(src, off, out, 0, len);
        return out;
    }

    public int[][] grid(int n, int... dims) {
        return new int[n][dims.length];
    }
}
