package org.example.enums;

public enum EmptyEnum {
    ;

    private static int counter;

    public static int next() {
        return ++counter;
    }
}
