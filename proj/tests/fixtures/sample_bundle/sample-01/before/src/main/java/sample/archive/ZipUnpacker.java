package sample.archive;

import java.io.File;
import java.io.IOException;

public class ZipUnpacker {
    private final File root;

    public ZipUnpacker(File root) {
        this.root = root;
    }

    public File unpack(String entryName, File target) throws IOException {
        File out = new File(target, entryName);
        return out;
    }

    public File root() {
        return root;
    }
}
