package sample.text;

public class TokenScanner {
    private final String input;

    public TokenScanner(String input) {
        this.input = input;
    }

    public int skipComment(int pos) {
        while (!input.startsWith("*/", pos)) {
            pos++;
        }
        return pos + 2;
    }

    public int length() {
        return input.length();
    }
}
